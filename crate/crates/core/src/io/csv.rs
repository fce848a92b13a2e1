use std::fmt::Write as _;

use super::BranchRecord;

/// Mean of the cell states.
pub fn default_functional(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn dot(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// One row per point: `s`, reduced coordinates, full state, the functional
/// `c · x`, the norm of `x` and one column per signature entry.
pub fn branch_csv(branch: &BranchRecord, functional: &[f64]) -> String {
    let d = branch.points.first().map_or(0, |p| p.y.len());
    let n = functional.len();
    let mut head = vec!["s".to_string()];
    head.extend((1..=d).map(|k| format!("y_{k}")));
    head.extend((1..=n).map(|k| format!("x_{k}")));
    head.push("cx".into());
    head.push("norm".into());
    head.extend(branch.signature_ids.iter().map(|id| format!("sig_{id}")));
    let mut out = head.join(",");
    out.push('\n');
    for p in &branch.points {
        let mut row = vec![format!("{:.16e}", p.s)];
        row.extend(p.y.iter().map(|v| format!("{v:.16e}")));
        row.extend(p.x.iter().map(|v| format!("{v:.16e}")));
        row.push(format!("{:.16e}", dot(functional, &p.x)));
        row.push(format!("{:.16e}", p.x.iter().map(|v| v * v).sum::<f64>().sqrt()));
        row.extend(p.signatures.iter().map(usize::to_string));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
