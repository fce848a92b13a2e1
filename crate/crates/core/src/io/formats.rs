//! The four plain-text input files.
//!
//! All files accept `#` comments and blank lines.
//!
//! * Matrix: the size `n` on the first line, then `n` rows of `n` entries
//!   (integers, `p/q` fractions or decimals).
//! * Subspaces: one subspace per line, `id kind d ; r_1 | r_2 | ... | r_n`,
//!   each `r_i` being the `d` entries of row `i` of the basis matrix. The
//!   trivial subspace is written `id trivial 0 ;`.
//! * Lattice: one cover relation per line, `child < parent`.
//! * Automorphisms: an optional `signflip 0|1` line, then one permutation
//!   per line in one-line notation `p(1) p(2) ... p(n)`, 1-based.

use std::fmt::Write as _;

use super::IoError;
use crate::polydiag::{PolyBasisMatrix, Subspace, SubspaceKind, SubspaceLattice};
use crate::rational::{format_rational, parse_rational, RatMatrix};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn err(file: &str, line: usize, column: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { file: file.to_string(), line, column, message: message.into() }
}

// 1-based column of the `k`-th whitespace-separated token.
fn column_of(line: &str, k: usize) -> usize {
    let mut col = 1;
    let mut seen = 0;
    let mut in_token = false;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else if !in_token {
            if seen == k {
                return i + 1;
            }
            seen += 1;
            in_token = true;
        }
        col = i + 2;
    }
    col
}

pub fn parse_matrix(text: &str, file: &str) -> Result<RatMatrix, IoError> {
    let mut lines = content_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| err(file, 1, 1, "empty matrix file"))?;
    let n: usize = first.parse().map_err(|_| err(file, ln, 1, format!("expected the size n, found '{first}'")))?;
    if n == 0 {
        return Err(err(file, ln, 1, "n must be positive"));
    }
    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let (ln, line) = lines.next().ok_or_else(|| err(file, ln + row + 1, 1, format!("expected {n} rows, found {row}")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(err(file, ln, 1, format!("expected {n} entries, found {}", tokens.len())));
        }
        for (k, t) in tokens.iter().enumerate() {
            data.push(parse_rational(t).ok_or_else(|| err(file, ln, column_of(line, k), format!("not a number: '{t}'")))?);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(file, ln, 1, "unexpected content after the matrix"));
    }
    Ok(RatMatrix::from_row_major(n, n, data))
}

pub fn format_matrix(m: &RatMatrix) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_rational(m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_subspaces(text: &str, file: &str, n: usize) -> Result<Vec<Subspace>, IoError> {
    let mut out: Vec<Subspace> = Vec::new();
    for (ln, line) in content_lines(text) {
        let (head, body) = line.split_once(';').ok_or_else(|| err(file, ln, 1, "missing ';' after 'id kind d'"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        if head.len() != 3 {
            return Err(err(file, ln, 1, "expected 'id kind d ;'"));
        }
        let id = head[0].to_string();
        if out.iter().any(|s| s.id == id) {
            return Err(err(file, ln, 1, format!("duplicate id {id}")));
        }
        let kind = SubspaceKind::parse(head[1]).ok_or_else(|| err(file, ln, column_of(line, 1), format!("unknown kind '{}'", head[1])))?;
        let d: usize = head[2].parse().map_err(|_| err(file, ln, column_of(line, 2), format!("bad dimension '{}'", head[2])))?;
        let body_col = line.find(';').map_or(1, |p| p + 2);
        let subspace = if d == 0 {
            if !body.trim().is_empty() {
                return Err(err(file, ln, body_col, "the trivial subspace has no basis entries"));
            }
            Subspace::trivial(id.clone(), n)
        } else {
            let rows: Vec<&str> = body.split('|').collect();
            if rows.len() != n {
                return Err(err(file, ln, body_col, format!("expected {n} rows separated by '|', found {}", rows.len())));
            }
            let mut entries = Vec::with_capacity(n * d);
            for row in rows {
                let vals: Vec<&str> = row.split_whitespace().collect();
                if vals.len() != d {
                    return Err(err(file, ln, body_col, format!("expected {d} entries per row, found {}", vals.len())));
                }
                for v in vals {
                    entries.push(v.parse::<i64>().map_err(|_| err(file, ln, body_col, format!("bad entry '{v}'")))?);
                }
            }
            let b = PolyBasisMatrix::validate(n, d, &entries)
                .map_err(|e| IoError::Validation(format!("{file}:{ln}: subspace {id}: {e}")))?;
            Subspace::from_basis(id.clone(), b)
        };
        if subspace.kind() != kind {
            return Err(IoError::Validation(format!(
                "{file}:{ln}: subspace {id} is declared {kind} but its basis is {}",
                subspace.kind()
            )));
        }
        out.push(subspace);
    }
    Ok(out)
}

pub fn format_subspace(s: &Subspace) -> String {
    let mut line = format!("{} {} {} ;", s.id, s.kind(), s.dim());
    if let Some(b) = s.basis() {
        let rows: Vec<String> = (0..b.n())
            .map(|i| (0..b.d()).map(|l| b.entry(i, l).to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = write!(line, " {}", rows.join(" | "));
    }
    line
}

pub fn format_subspaces(subspaces: &[Subspace]) -> String {
    subspaces.iter().map(|s| format_subspace(s) + "\n").collect()
}

/// Cover relations as `(child id, parent id)`.
pub fn parse_lattice(text: &str, file: &str) -> Result<Vec<(String, String)>, IoError> {
    content_lines(text)
        .map(|(ln, line)| {
            let (child, parent) = line.split_once('<').ok_or_else(|| err(file, ln, 1, "expected 'child < parent'"))?;
            let (child, parent) = (child.trim(), parent.trim());
            if child.is_empty() || parent.is_empty() || child.contains(char::is_whitespace) || parent.contains(char::is_whitespace) {
                return Err(err(file, ln, 1, "expected 'child < parent'"));
            }
            Ok((child.to_string(), parent.to_string()))
        })
        .collect()
}

pub fn format_lattice(lattice: &SubspaceLattice) -> String {
    lattice
        .covers()
        .iter()
        .map(|&(c, p)| format!("{} < {}\n", lattice.get(c).id, lattice.get(p).id))
        .collect()
}

/// Parsed automorphism file: 0-based permutations and the optional sign-flip override.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismFile {
    pub perms: Vec<Vec<usize>>,
    pub sign_flip: Option<bool>,
}

pub fn parse_automorphisms(text: &str, file: &str, n: usize) -> Result<AutomorphismFile, IoError> {
    let mut perms = Vec::new();
    let mut sign_flip = None;
    for (ln, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("signflip") {
            if !perms.is_empty() || sign_flip.is_some() {
                return Err(err(file, ln, 1, "'signflip' must be the first line"));
            }
            sign_flip = Some(match rest.trim() {
                "0" => false,
                "1" => true,
                other => return Err(err(file, ln, 10, format!("expected 0 or 1, found '{other}'"))),
            });
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(err(file, ln, 1, format!("expected {n} images, found {}", tokens.len())));
        }
        let mut perm = Vec::with_capacity(n);
        for (k, t) in tokens.iter().enumerate() {
            let v: usize = t.parse().map_err(|_| err(file, ln, column_of(line, k), format!("not an index: '{t}'")))?;
            if v == 0 || v > n {
                return Err(err(file, ln, column_of(line, k), format!("index {v} out of range 1..={n}")));
            }
            perm.push(v - 1);
        }
        perms.push(perm);
    }
    Ok(AutomorphismFile { perms, sign_flip })
}

pub fn format_automorphisms(perms: &[Vec<usize>], sign_flip: bool) -> String {
    let mut out = format!("signflip {}\n", u8::from(sign_flip));
    for p in perms {
        let line: Vec<String> = p.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAMOND: &str = "# diamond Laplacian\n4\n2 -1 0 -1\n-1 3 -1 -1\n0 -1 2 -1\n-1 -1 -1 3\n";

    #[test]
    fn matrix_round_trip() {
        let m = parse_matrix(DIAMOND, "d.mat").unwrap();
        assert_eq!(m.nrows(), 4);
        assert_eq!(parse_matrix(&format_matrix(&m), "x").unwrap(), m);
        let one = parse_matrix("1\n0\n", "one").unwrap();
        assert!(one.is_zero() && one.nrows() == 1);
    }

    #[test]
    fn matrix_errors_have_positions() {
        match parse_matrix("2\n1 x\n0 1\n", "bad.mat") {
            Err(IoError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_matrix("2\n1 0\n", "short"), Err(IoError::Parse { .. })));
        assert!(matches!(parse_matrix("2\n1 0 0\n0 1\n", "wide"), Err(IoError::Parse { line: 2, .. })));
    }

    #[test]
    fn subspace_round_trip() {
        let text = "W0 trivial 0 ;\nW5 synchrony 2 ; 1 0 | 0 1 | 1 0 | 1 0\nW3 anti-synchrony 1 ; 0 | 1 | 0 | -1\n";
        let subs = parse_subspaces(text, "s", 4).unwrap();
        assert_eq!(subs.len(), 3);
        assert_eq!(format_subspaces(&subs), text);
        let bad = parse_subspaces("W9 synchrony 1 ; 0 | 1 | 0 | -1\n", "s", 4);
        assert!(matches!(bad, Err(IoError::Validation(_))));
        assert!(parse_subspaces("W9 synchrony 1 ; 2 | 1 | 0 | 1\n", "s", 4).is_err());
    }

    #[test]
    fn automorphism_file() {
        let a = parse_automorphisms("signflip 1\n1 2 3 4\n3 2 1 4\n", "a", 4).unwrap();
        assert_eq!(a.sign_flip, Some(true));
        assert_eq!(a.perms[1], vec![2, 1, 0, 3]);
        assert_eq!(format_automorphisms(&a.perms, true), "signflip 1\n1 2 3 4\n3 2 1 4\n");
        assert!(parse_automorphisms("1 2 5 4\n", "a", 4).is_err());
    }

    #[test]
    fn lattice_file() {
        let c = parse_lattice("W0 < W1\n# comment\nW1<W4\n", "l").unwrap();
        assert_eq!(c, vec![("W0".into(), "W1".into()), ("W1".into(), "W4".into())]);
        assert!(parse_lattice("W0 W1\n", "l").is_err());
    }
}
