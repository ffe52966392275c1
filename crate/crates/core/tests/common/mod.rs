//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numeric kernel or control law.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ADJACENCY: [[f64; 4]; 4] = [
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
];
pub const PINNING: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

/// Laplacian of the example network, written out by hand.
pub const LAPLACIAN: [[f64; 4]; 4] = [
    [1.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 1.0, 0.0],
    [0.0, 0.0, -1.0, 1.0],
];

/// `L + B`, written out by hand.
pub const GROUNDED: [[f64; 4]; 4] = [
    [2.0, 0.0, -1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, -1.0, 1.0, 0.0],
    [0.0, 0.0, -1.0, 1.0],
];

pub fn u0(t: f64) -> f64 {
    2.0 * (0.1 * PI * t).cos() / (1.0 + (-t).exp())
}

pub fn leader_f(t: f64, x: f64) -> f64 {
    u0(t) * t.cos() + 0.2 * x.sin()
}

pub fn follower_f(i: usize, t: f64, x: f64) -> f64 {
    match i {
        0 => {
            let s = x.sin();
            0.1 * s.signum() * s.abs().powf(1.0 / 3.0) + (2.0 * PI * t).cos().powi(2) + (-t).exp()
        }
        1 => 0.1 * x.sin() + (2.0 * PI * t).cos(),
        2 => -x * t.cos() - x.sin() - x.cos(),
        3 => x.sin() + (-x * t).exp().cos(),
        _ => unreachable!(),
    }
}

pub fn disturbance(amp: f64, t: f64) -> f64 {
    amp * (PI * PI * t * t).sin()
}

/// Gauss-Jordan inverse with full row pivoting.
pub fn gauss_jordan_inverse(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(p, c);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Continuous sliding-mode reference on the example network: the control
/// is recomputed from scratch at every grid point and held over the step.
/// Returns the sampled states `[x0, x1..x4]` at every grid point.
pub fn continuous_reference(
    x_init: [f64; 4],
    offsets: [f64; 4],
    amp: f64,
    dt: f64,
    steps: usize,
) -> Vec<[f64; 5]> {
    let (k, tau) = (15.0, 0.5);
    let h: Vec<Vec<f64>> = GROUNDED.iter().map(|r| r.to_vec()).collect();
    let hinv = gauss_jordan_inverse(&h).unwrap();
    let rate = |t: f64, s: &[f64; 5], u: &[f64; 4]| -> [f64; 5] {
        let mut d = [leader_f(t, s[0]), 0.0, 0.0, 0.0, 0.0];
        for i in 0..4 {
            d[i + 1] = follower_f(i, t, s[i + 1]) + u[i] + disturbance(amp, t);
        }
        d
    };
    let mut s = [0.0, x_init[0], x_init[1], x_init[2], x_init[3]];
    let mut out = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let t = n as f64 * dt;
        out.push(s);
        if n == steps {
            break;
        }
        let e: Vec<f64> = (0..4).map(|i| s[i + 1] - s[0] - offsets[i]).collect();
        let sigma: Vec<f64> = (0..4).map(|i| (0..4).map(|j| h[i][j] * e[j]).sum()).collect();
        let f0 = leader_f(t, s[0]);
        let w: Vec<f64> = (0..4)
            .map(|j| {
                let sw = if sigma[j] == 0.0 {
                    0.0
                } else {
                    k * sigma[j].signum() * sigma[j].abs().powf(tau)
                };
                sw + follower_f(j, t, s[j + 1]) - f0 - u0(t)
            })
            .collect();
        let mut u = [0.0; 4];
        for i in 0..4 {
            u[i] = -(0..4).map(|j| hinv[i][j] * w[j]).sum::<f64>();
        }
        let add = |a: &[f64; 5], b: &[f64; 5], c: f64| -> [f64; 5] {
            let mut r = *a;
            for q in 0..5 {
                r[q] += c * b[q];
            }
            r
        };
        let k1 = rate(t, &s, &u);
        let k2 = rate(t + dt / 2.0, &add(&s, &k1, dt / 2.0), &u);
        let k3 = rate(t + dt / 2.0, &add(&s, &k2, dt / 2.0), &u);
        let k4 = rate(t + dt, &add(&s, &k3, dt), &u);
        for q in 0..5 {
            s[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
    }
    out
}

/// Random 0/1 digraph on `n` followers plus a pinning vector.
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let density = rng.gen_range(0.1..0.6);
    let adjacency = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i != j && rng.gen_bool(density) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let pin_p = rng.gen_range(0.1..0.5);
    let pinning = (0..n).map(|_| if rng.gen_bool(pin_p) { 1.0 } else { 0.0 }).collect();
    (adjacency, pinning)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Depth-first reachability from the leader; `a[i][j] > 0` means follower
/// `i` hears follower `j`.
pub fn leader_reaches_all(adjacency: &[Vec<f64>], pinning: &[f64]) -> bool {
    let n = pinning.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| pinning[i] > 0.0).collect();
    while let Some(j) = stack.pop() {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        stack.extend((0..n).filter(|&i| !seen[i] && adjacency[i][j] > 0.0));
    }
    seen.iter().all(|&s| s)
}
