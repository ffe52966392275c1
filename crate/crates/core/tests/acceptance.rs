//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use etsmc::cli::emit_csv_with_digits;
use etsmc::engine::{inter_event_stats, run, RunOutput, SimConfig, TriggerPolicy};
use etsmc::graph::build_topology;
use etsmc::numeric::{eigenvalues, invert, rk4_step, DenseMatrix};
use etsmc::ScenarioPreset;

const TIGHT_BAND: f64 = 0.05;
const LOOSE_BAND: f64 = 0.5;
const SETTLE: f64 = 5.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

/// Largest `|e_i|` over `t >= SETTLE`, and whether every state stayed finite.
fn tail_error(out: &RunOutput) -> (f64, bool) {
    let mut worst = 0.0f64;
    let mut finite = true;
    for r in &out.trajectory.records {
        finite &= r.x0.is_finite() && r.x.iter().all(|v| v.is_finite());
        if r.t >= SETTLE - 1e-12 {
            worst = r.e.iter().fold(worst, |m, e| m.max(e.abs()));
        }
    }
    (worst, finite)
}

fn band_check(preset: ScenarioPreset, band: f64) -> (bool, String, Duration) {
    let (out, elapsed) = timed(|| run(&preset.config()).expect("preset run"));
    let (worst, finite) = tail_error(&out);
    let pass = finite && worst <= band;
    (pass, format!("{preset}: max|e| for t>=5 = {worst:.4e} (band {band})"), elapsed)
}

fn criterion_1() -> Outcome {
    let a: Vec<Vec<f64>> = common::ADJACENCY.iter().map(|r| r.to_vec()).collect();
    let mut best = Duration::MAX;
    let mut topo = None;
    for _ in 0..20 {
        let (t, d) = timed(|| build_topology(&a, &common::PINNING).unwrap());
        best = best.min(d);
        topo = Some(t);
    }
    let topo = topo.unwrap();
    let l_ok = topo.laplacian.to_rows() == common::LAPLACIAN.map(|r| r.to_vec()).to_vec();
    let h_ok = topo.grounded.to_rows() == common::GROUNDED.map(|r| r.to_vec()).to_vec();
    let ev = eigenvalues(&topo.laplacian).unwrap();
    let ev_ok = ev
        .iter()
        .zip([0.0, 1.0, 1.0, 1.0])
        .all(|(c, want)| (c.re - want).abs() <= 1e-9 && c.im.abs() <= 1e-9);
    let inv_ok = topo.grounded_inverse().is_ok();
    let fast = best < Duration::from_millis(1);
    outcome(
        l_ok && h_ok && ev_ok && inv_ok && fast,
        format!("L exact {l_ok}, H exact {h_ok}, spectrum {{0,1,1,1}} {ev_ok}, H invertible {inv_ok}, build {best:?}"),
    )
}

fn criterion_2() -> Outcome {
    let (pass, detail, elapsed) = band_check(ScenarioPreset::Consensus, TIGHT_BAND);
    let fast = elapsed < Duration::from_secs(5);
    outcome(pass && fast, format!("{detail}, runtime {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let (pass, detail, _) = band_check(ScenarioPreset::ConsensusMatched, TIGHT_BAND);
    outcome(pass, detail)
}

fn criterion_4() -> Outcome {
    let (pass, detail, _) = band_check(ScenarioPreset::ConsensusMismatched, LOOSE_BAND);
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let checks = [
        band_check(ScenarioPreset::Formation, TIGHT_BAND),
        band_check(ScenarioPreset::FormationMatched, TIGHT_BAND),
        band_check(ScenarioPreset::FormationMismatched, LOOSE_BAND),
    ];
    let pass = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join("; ");
    outcome(pass, detail)
}

fn criterion_6() -> Outcome {
    let c = ScenarioPreset::Consensus.config();
    let out = run(&c).unwrap();
    let total = c.n_steps();
    let from = total - (SETTLE / c.dt).round() as usize;
    let late_steps = total - from;
    let limit = late_steps as f64 * 0.2;
    let counts: Vec<usize> = (0..4).map(|i| out.events.count_in(i, from + 1, total + 1)).collect();
    let economy = counts.iter().all(|&n| n as f64 <= limit);
    let stats = inter_event_stats(&out.events);
    let zeno_free = stats.iter().all(|s| s.certifies_min_dt(c.dt));
    let mins: Vec<String> = stats
        .iter()
        .map(|s| s.min.map_or("-".into(), |m| format!("{m:.0e}")))
        .collect();
    outcome(
        economy && zeno_free,
        format!(
            "late-window events {counts:?} of {late_steps} steps (limit {limit}); min T {mins:?} >= dt {zeno_free}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let out = run(&ScenarioPreset::Consensus.config()).unwrap();
    let reports = &out.diagnostics.reaching;
    let pass = reports.iter().all(|r| r.as_ref().is_some_and(|r| r.passes()));
    let detail = reports
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Some(r) => format!(
                "agent {}: eta {:.3}, {} violations / {} samples",
                i + 1,
                r.eta_measured,
                r.violations.len(),
                r.samples
            ),
            None => format!("agent {}: no data", i + 1),
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn criterion_8() -> Outcome {
    let mut c: SimConfig = ScenarioPreset::Consensus.config();
    c.trigger = TriggerPolicy::EveryStep;
    let periodic = run(&c).unwrap();
    let reference = common::continuous_reference([10.0, -7.0, 4.0, -9.0], [0.0; 4], 0.0, c.dt, c.n_steps());
    let mut sup = 0.0f64;
    for (r, s) in periodic.trajectory.records.iter().zip(&reference) {
        sup = sup.max((r.x0 - s[0]).abs());
        for i in 0..4 {
            sup = sup.max((r.x[i] - s[i + 1]).abs());
        }
    }
    let matches = sup <= 1e-6 && periodic.trajectory.len() == reference.len();

    let triggered = run(&ScenarioPreset::Consensus.config()).unwrap();
    let fewer = (0..4).all(|i| triggered.events.count(i) < periodic.events.count(i));
    let (worst, finite) = tail_error(&triggered);
    let still_converges = finite && worst <= TIGHT_BAND;
    let counts: Vec<usize> = (0..4).map(|i| triggered.events.count(i)).collect();
    outcome(
        matches && fewer && still_converges,
        format!(
            "every-step vs reference sup {sup:.2e} (<= 1e-6 {matches}); events {counts:?} < {} {fewer}; criterion 2 band {still_converges}",
            periodic.events.count(0)
        ),
    )
}

fn criterion_9() -> Outcome {
    let err = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut x = vec![1.0];
        for k in 0..steps {
            x = rk4_step(|_, s| vec![-s[0]], k as f64 * dt, &x, dt).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let ratio = err(0.1) / err(0.05);
    let order_ok = ratio >= 12.0;

    let h = DenseMatrix::from_rows(&common::GROUNDED).unwrap();
    let prod = invert(&h).unwrap().matmul(&h).unwrap();
    let inv_err = prod.max_abs_diff(&DenseMatrix::identity(4));
    let inv_ok = inv_err <= 1e-10;

    let mut rng = common::rng(0x5eed);
    let mut mismatches = 0;
    for case in 0..200 {
        let n = 1 + case % 6;
        let (a, b) = common::random_digraph(&mut rng, n);
        let topo = build_topology(&a, &b).unwrap();
        let reach = common::leader_reaches_all(&a, &b);
        if reach != invert(&topo.grounded).is_ok() || reach != topo.has_leader_rooted_spanning_tree() {
            mismatches += 1;
        }
    }
    outcome(
        order_ok && inv_ok && mismatches == 0,
        format!("RK4 ratio {ratio:.2}, |H^-1 H - I| {inv_err:.1e}, spanning-tree mismatches {mismatches}/200"),
    )
}

fn criterion_10() -> Outcome {
    let mut differing = Vec::new();
    for p in ScenarioPreset::ALL {
        let render = || {
            let dir = tempfile::tempdir().unwrap();
            emit_csv_with_digits(&run(&p.config()).unwrap(), dir.path(), 17).unwrap();
            ["trajectory.csv", "events.csv", "diagnostics.csv"].map(|f| std::fs::read(dir.path().join(f)).unwrap())
        };
        if render() != render() {
            differing.push(p.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} presets byte-identical, differing: {differing:?}", ScenarioPreset::ALL.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("topology exactness", criterion_1),
        ("undisturbed consensus", criterion_2),
        ("matched disturbance rejection", criterion_3),
        ("mismatched boundedness", criterion_4),
        ("formation", criterion_5),
        ("event economy", criterion_6),
        ("reaching property", criterion_7),
        ("oracle equivalence", criterion_8),
        ("numeric kernel", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
