//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, DVector};
use netbif::bifurcation::{eigenvalues, explore, restricted_jacobian, BifurcationEvent, BranchForest, BranchOrigin};
use netbif::io::{load_inputs, Inputs, RunConfig};
use netbif::network::{quotient_matrix, InternalDynamics, NetworkSystem};
use netbif::polydiag::{enumerate_invariant, pseudoinverse, Subspace};
use netbif::rational::{parse_rational, RatMatrix};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rat(rows: &[&[&str]]) -> RatMatrix {
    let n = rows.len();
    let m = rows[0].len();
    RatMatrix::from_row_major(n, m, rows.iter().flat_map(|r| r.iter().map(|t| parse_rational(t).unwrap())).collect())
}

struct Run {
    inputs: Inputs,
    forest: BranchForest,
}

fn run_config(name: &str) -> Run {
    let cfg = RunConfig::load(&data(name)).unwrap();
    let inputs = load_inputs(&cfg).unwrap();
    let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &cfg.explore_settings(), cfg.start().as_ref()).unwrap();
    Run { inputs, forest }
}

impl Run {
    fn subspace(&self, id: &str) -> &Subspace {
        self.inputs.lattice.get(self.inputs.lattice.index_of(id).unwrap())
    }

    fn id_of(&self, text: &str) -> String {
        self.inputs.lattice.get(find_pattern(&self.inputs.lattice, text)).id.clone()
    }

    fn orbit_of_id(&self, id: &str) -> usize {
        self.inputs.lattice.orbit_of(self.inputs.lattice.index_of(id).unwrap())
    }

    fn events_on(&self, branch: &str) -> Vec<&BifurcationEvent> {
        self.forest.events.iter().filter(|e| e.mother_branch == branch).collect()
    }
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let b = basis(&[vec![1, 0], vec![0, 1], vec![0, 0], vec![-1, 0]]);
    let bp = pseudoinverse(&b);
    ensure(bp == rat(&[&["1/2", "0", "0", "-1/2"], &["0", "1", "0", "0"]]), format!("B+ = {bp:?}"))?;

    let m = RatMatrix::from_integers(&[vec![0, 1, 1, 1], vec![1, 0, 0, -1], vec![1, 0, 0, 1], vec![1, -1, 1, 0]]);
    let q = quotient_matrix(&m, &b).map_err(|e| e.to_string())?;
    ensure(q == RatMatrix::from_integers(&[vec![-1, 1], vec![2, 0]]), format!("B+MB = {q:?}"))?;

    let b5 = pattern("a b a a");
    let q5 = quotient_matrix(&diamond(), &b5).map_err(|e| e.to_string())?;
    ensure(q5 == RatMatrix::from_integers(&[vec![1, -1], vec![-3, 3]]), format!("B5+LB5 = {q5:?}"))?;

    let b1 = pattern("a a a a");
    let q1 = quotient_matrix(&diamond(), &b1).map_err(|e| e.to_string())?;
    ensure(q1 == RatMatrix::from_integers(&[vec![0]]), format!("B1+LB1 = {q1:?}"))?;

    let t = clock.elapsed().as_secs_f64();
    ensure(t < 1.0, format!("took {t:.3} s"))?;
    Ok(format!("exact quotients in {t:.4} s"))
}

fn criterion_2() -> Outcome {
    let clock = Instant::now();
    let inputs = load_inputs(&RunConfig::load(&data("diamond.toml")).unwrap()).map_err(|e| e.to_string())?;
    let lat = &inputs.lattice;
    let named = [
        "a a a a",
        "a -a a -a",
        "0 a 0 -a",
        "a 0 -a 0",
        "a b a a",
        "a b a b",
        "a b -a -b",
        "a b a c",
        "a b c b",
        "a b c d",
        "a a a b",
    ];
    for p in named {
        let b = pattern(p);
        ensure(lat.subspaces().iter().any(|w| w.basis() == Some(&b)), format!("missing ({p})"))?;
    }
    ensure(lat.trivial_index().is_some(), "missing the trivial subspace")?;
    ensure(lat.len() == 12, format!("expected 12 subspaces, found {}", lat.len()))?;

    let w5 = find_pattern(lat, "a b a a");
    let w5r = find_pattern(lat, "a a a b");
    let orbit = &lat.orbits()[lat.orbit_of(w5)];
    ensure(orbit.len() == 2 && orbit.contains(&w5r), format!("W5 orbit {orbit:?}"))?;
    ensure(lat.orbits().len() == 11, format!("{} orbits", lat.orbits().len()))?;

    let perms: BTreeSet<Vec<usize>> = inputs.group.permutations().iter().cloned().collect();
    let expected: BTreeSet<Vec<usize>> = [vec![0, 1, 2, 3], vec![2, 1, 0, 3], vec![0, 3, 2, 1], vec![2, 3, 0, 1]].into();
    ensure(perms == expected, format!("automorphisms {perms:?}"))?;

    let t = clock.elapsed().as_secs_f64();
    ensure(t < 5.0, format!("took {t:.3} s"))?;
    Ok(format!("12 subspaces in 11 orbits, |Aut| = 4, {t:.3} s"))
}

fn criterion_3(run: &Run) -> Outcome {
    let trivial = run.inputs.lattice.get(run.inputs.lattice.trivial_index().unwrap()).id.clone();
    let on_trivial: Vec<&BifurcationEvent> = run.forest.events.iter().filter(|e| e.mother == trivial).collect();
    let mut sites: Vec<f64> = Vec::new();
    for e in &on_trivial {
        if !sites.iter().any(|s| (s - e.s_star).abs() < 1e-6) {
            sites.push(e.s_star);
        }
    }
    sites.sort_by(f64::total_cmp);
    ensure(sites.len() == 3, format!("trivial-branch sites {sites:?}"))?;
    for (got, want) in sites.iter().zip([0.0, 2.0, 4.0]) {
        ensure((got - want).abs() <= 1e-8, format!("site {got} vs {want}"))?;
    }
    let at4: Vec<&&BifurcationEvent> = on_trivial.iter().filter(|e| (e.s_star - 4.0).abs() < 1e-6).collect();
    let orbits: BTreeSet<usize> = at4.iter().map(|e| run.orbit_of_id(&e.daughter)).collect();
    ensure(at4.len() == 3 && orbits.len() == 3, format!("{} events at s = 4 in {} orbits", at4.len(), orbits.len()))?;
    let mut dims: Vec<usize> = at4.iter().map(|e| run.subspace(&e.daughter).dim()).collect();
    dims.sort();
    ensure(dims == [1, 1, 2], format!("daughter dimensions {dims:?}"))?;
    let two = at4.iter().find(|e| run.subspace(&e.daughter).dim() == 2).unwrap();
    let gap = direction_gap(&DVector::from_column_slice(&two.critical_vector), &[1.0, -3.0, 1.0, 1.0]);
    ensure(gap <= 1e-6, format!("critical vector {:?} off by {gap:e}", two.critical_vector))?;
    Ok(format!("sites {sites:?}, daughters of dimensions {dims:?}, x0 gap {gap:.1e}"))
}

fn criterion_4(run: &Run) -> Outcome {
    let diag = run.id_of("a a a a");
    let branches: Vec<_> = run.forest.branches.iter().filter(|b| b.subspace == diag).collect();
    ensure(branches.len() == 1, format!("{} branches in the diagonal", branches.len()))?;
    let b = branches[0];
    // Distance from (s, x) to the curve point (-m^2, m 1) where m is the mean
    // of x; this bounds the distance to the curve and stays well conditioned
    // at the tip s = 0, where sqrt(-s) has infinite slope.
    let mut worst: f64 = 0.0;
    for p in &b.points {
        ensure(p.s <= 1e-12, format!("point at s = {}", p.s))?;
        let m = p.x.iter().sum::<f64>() / 4.0;
        let dx: f64 = p.x.iter().map(|v| (v - m).powi(2)).sum();
        worst = worst.max(((p.s + m * m).powi(2) + dx).sqrt());
    }
    ensure(worst <= 1e-10, format!("max distance from the curve sqrt(-s) (1,1,1,1) is {worst:e}"))?;

    let events = run.events_on(&b.id);
    let near = |s: f64| events.iter().filter(move |e| (e.s_star - s).abs() <= 1e-7).collect::<Vec<_>>();
    ensure(!near(-1.0).is_empty(), "no event at s = -1")?;
    let at2 = near(-2.0);
    let w5 = run.orbit_of_id(&run.id_of("a b a a"));
    let w6 = run.id_of("a b a b");
    let daughters: BTreeSet<String> = at2.iter().map(|e| e.daughter.clone()).collect();
    ensure(at2.len() == 2, format!("{} events at s = -2: {daughters:?}", at2.len()))?;
    ensure(at2.iter().any(|e| run.orbit_of_id(&e.daughter) == w5), "no W5-type daughter at s = -2")?;
    let e6 = at2.iter().find(|e| e.daughter == w6).ok_or("no W6-type daughter at s = -2")?;

    let q = run.inputs.system.restrict(run.subspace(&w6)).map_err(|e| e.to_string())?;
    let x = DVector::from_column_slice(&e6.x_star);
    let j = restricted_jacobian(&q, e6.s_star, &x);
    let mut ev: Vec<f64> = eigenvalues(&j).map_err(|e| e.to_string())?.iter().map(|c| c.re).collect();
    ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    ensure(ev[0].abs() <= 1e-6 && (ev[1] - 4.0).abs() <= 1e-6, format!("W6 spectrum {ev:?}"))?;
    let svd = j.svd(false, true);
    let (k, _) = svd.singular_values.argmin();
    let kernel = svd.v_t.unwrap().row(k).transpose();
    let gap = direction_gap(&kernel, &[1.0, -1.0]);
    ensure(gap <= 1e-6, format!("W6 kernel {kernel:?}"))?;
    Ok(format!("max distance to sqrt(-s) 1 = {worst:.1e}, W6 spectrum {{{:.1e}, {:.6}}}", ev[0], ev[1]))
}

fn criterion_5(run: &Run) -> Outcome {
    let w5 = run.id_of("a b a a");
    let w8 = run.id_of("a b a c");
    let a = 0.5f64.sqrt();
    let y = DVector::from_vec(vec![a, -(2f64.sqrt())]);
    let q5 = run.inputs.system.restrict(run.subspace(&w5)).map_err(|e| e.to_string())?;
    let f = q5.eval(2.5, &y).map_err(|e| e.to_string())?.norm();
    ensure(f <= 1e-12, format!("|F_B5(5/2, y)| = {f:e}"))?;

    let e = run
        .forest
        .events
        .iter()
        .find(|e| e.mother == w5 && e.daughter == w8 && (e.s_star - 2.5).abs() <= 1e-6)
        .ok_or("no W5 -> W8 event at s = 2.5")?;
    let lift = q5.lift(&y);
    let x = DVector::from_column_slice(&e.x_star);
    let dx = (&x - &lift).norm().min((&x + &lift).norm());
    ensure(dx <= 1e-6, format!("x* = {:?} is {dx:e} from the lift", e.x_star))?;
    let x0 = run.subspace(&w8).project_unchecked(&DVector::from_column_slice(&e.critical_vector));
    let gap = direction_gap(&x0, &[1.0, 0.0, -2.0]);
    ensure(gap <= 1e-6, format!("critical vector in W8 coordinates {x0:?}"))?;
    Ok(format!("s* = {:.12}, |F_B5| = {f:.1e}, |x* - lift| = {dx:.1e}", e.s_star))
}

fn criterion_6(run: &Run) -> Outcome {
    let w6 = run.id_of("a b a b");
    let daughters: Vec<_> = run.forest.branches.iter().filter(|b| b.subspace == w6).collect();
    ensure(daughters.len() == 2, format!("{} W6 branches", daughters.len()))?;
    let in_window: Vec<Vec<f64>> = daughters
        .iter()
        .map(|b| run.events_on(&b.id).iter().map(|e| e.s_star).filter(|s| (-3.0..=-2.0).contains(s)).collect())
        .collect();
    let with: Vec<usize> = (0..2).filter(|&k| !in_window[k].is_empty()).collect();
    ensure(with.len() == 1, format!("events on the W6 branches in [-3, -2]: {in_window:?}"))?;
    let s = &in_window[with[0]];
    ensure(
        s.len() == 1 && (s[0] + 2.4).abs() <= 0.05,
        format!("the W6 branch event is at s = {:.10}, outside -2.4 +/- 0.05", s[0]),
    )?;
    Ok(format!("one W6 branch bifurcates at s = {:.6}", s[0]))
}

fn criterion_7() -> Outcome {
    let pitch = run_config("pitchfork.toml");
    let mut worst: f64 = 0.0;
    for b in pitch.forest.branches.iter().filter(|b| matches!(b.origin, BranchOrigin::Event { .. })) {
        for p in &b.points {
            worst = worst.max((p.s + p.y[0] * p.y[0]).abs());
        }
    }
    ensure(pitch.forest.events.len() == 1 && worst <= 1e-8, format!("pitchfork: max |s + y^2| = {worst:e}"))?;

    let fold = run_config("fold.toml");
    ensure(fold.forest.events.is_empty(), format!("fold: {} events", fold.forest.events.len()))?;
    ensure(fold.forest.branches.iter().any(|b| b.points.iter().any(|p| p.x[0] < 0.0)), "fold: lower half not reached")?;

    let trans = run_config("transcritical.toml");
    ensure(!trans.inputs.group.has_sign_flip(), "transcritical: sign flip in the group")?;
    ensure(trans.forest.events.len() == 1, format!("transcritical: {} events", trans.forest.events.len()))?;
    let e = &trans.forest.events[0];
    ensure(e.s_star.abs() <= 1e-8, format!("transcritical: s* = {}", e.s_star))?;
    ensure(e.spawn_dirs.len() == 2 && e.daughter_branches.len() == 2, format!("transcritical: {} seeds", e.spawn_dirs.len()))?;
    Ok(format!("pitchfork max |s + y^2| = {worst:.1e}; fold 0 events; transcritical 2 seeds"))
}

fn sample_points(n: usize, seed: u64) -> Vec<(f64, DVector<f64>)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..5).map(|_| (rng.gen_range(-3.0..3.0), DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0)))).collect()
}

fn criterion_8() -> Outcome {
    let mut checked = 0usize;
    for (name, m) in suite_matrices() {
        let n = m.nrows();
        for anti in [true, false] {
            let subs = enumerate_invariant(&m, anti, 8).map_err(|e| e.to_string())?;
            let got: BTreeSet<Vec<i64>> = subs.iter().map(|w| projector_key(&projector(w, n))).collect();
            ensure(got.len() == subs.len(), format!("{name}: duplicate subspaces"))?;
            ensure(got == oracle_invariant(&m, anti), format!("{name}: enumeration differs from brute force (anti = {anti})"))?;
        }
        let subs = enumerate_invariant(&m, true, 8).map_err(|e| e.to_string())?;
        for (f, odd) in [(InternalDynamics::cubic_soft(), true), (InternalDynamics::quad_cubic(0.7), false)] {
            let sys = NetworkSystem::new(m.clone(), -1.0, f).map_err(|e| e.to_string())?;
            for w in subs.iter().filter(|w| w.basis().is_some() && (odd || w.basis().unwrap().is_synchrony())) {
                let b = w.basis().unwrap().to_f64();
                let bp = b.clone().pseudo_inverse(1e-12).unwrap();
                let q = sys.restrict(w).map_err(|e| format!("{name} {}: {e}", w.id))?;
                for (s, x) in sample_points(w.dim(), checked as u64) {
                    let fx = sys.eval(s, &(&b * &x)).unwrap();
                    let fb = q.eval(s, &x).unwrap();
                    let scale = 1.0 + fx.norm();
                    ensure((&bp * &fx - &fb).norm() <= 1e-12 * scale, format!("{name} {}: restriction identity", w.id))?;
                    ensure(w.membership_residual(&fx) <= 1e-12 * scale, format!("{name} {}: not flow-invariant", w.id))?;
                    jacobian_check(&q, s, &x).map_err(|e| format!("{name} {}: {e}", w.id))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} sample points on 23 matrices"))
}

fn jacobian_check(q: &netbif::network::QuotientSystem, s: f64, y: &DVector<f64>) -> Result<(), String> {
    let h = 1e-6;
    let d = y.len();
    let j = q.jac_x(s, y);
    let mut fd = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut yp = y.clone();
        let mut ym = y.clone();
        yp[k] += h;
        ym[k] -= h;
        let col = (q.eval(s, &yp).unwrap() - q.eval(s, &ym).unwrap()) / (2.0 * h);
        fd.set_column(k, &col);
    }
    let js = q.jac_s(s, y);
    let fs = (q.eval(s + h, y).unwrap() - q.eval(s - h, y).unwrap()) / (2.0 * h);
    let scale = 1.0 + j.amax();
    ensure((&j - &fd).amax() <= 1e-6 * scale, format!("jac_x differs from central differences by {:e}", (&j - &fd).amax()))?;
    ensure((&js - &fs).amax() <= 1e-6 * scale, "jac_s differs from central differences")
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    let mut times = Vec::new();
    let out = tmp.path().join("run");
    for _ in 0..2 {
        let _ = fs::remove_dir_all(&out);
        let clock = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_netbif"))
            .arg("run")
            .arg(data("diamond.toml"))
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        times.push(clock.elapsed().as_secs_f64());
        ensure(status.status.success(), format!("run failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        trees.push(read_tree(&out));
    }
    ensure(times.iter().all(|&t| t < 10.0), format!("run times {times:?}"))?;
    ensure(trees[0].len() > 3, "no output files")?;
    let names: Vec<&String> = trees[0].iter().map(|(n, _)| n).collect();
    ensure(trees[0] == trees[1], format!("outputs differ between runs: {names:?}"))?;
    Ok(format!("{} files byte-identical, {:.2} s and {:.2} s", trees[0].len(), times[0], times[1]))
}

fn main() {
    let diamond_run = AssertUnwindSafe(run_config("diamond.toml"));
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("quotient matrices are exact", Box::new(criterion_1)),
        ("diamond subspaces, orbits and automorphisms", Box::new(criterion_2)),
        ("trivial-branch events of the diamond", Box::new(|| criterion_3(&diamond_run))),
        ("synchronous branch and its events", Box::new(|| criterion_4(&diamond_run))),
        ("tertiary event on the W5 branch", Box::new(|| criterion_5(&diamond_run))),
        ("secondary W6 branches", Box::new(|| criterion_6(&diamond_run))),
        ("one-cell oracles", Box::new(criterion_7)),
        ("property suites", Box::new(criterion_8)),
        ("pipeline time and determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
