use std::fmt::Write;

use crate::engine::TopologySpec;
use crate::graph::GraphError;
use crate::numeric::DenseMatrix;

fn matrix_block(out: &mut String, name: &str, m: &DenseMatrix) {
    let _ = writeln!(out, "{name} =");
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format!("{:>4}", fmt_entry(*v))).collect();
        let _ = writeln!(out, "  [{}]", cells.join(" "));
    }
}

fn fmt_entry(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Human-readable summary of a topology and its spectral properties.
pub fn topology_report(spec: &TopologySpec) -> Result<String, GraphError> {
    let t = spec.build()?;
    let mut out = String::new();
    let _ = writeln!(out, "followers: {}", t.n_followers);
    matrix_block(&mut out, "A", &t.adjacency);
    matrix_block(&mut out, "B", &t.pinning);
    matrix_block(&mut out, "D", &t.degree);
    matrix_block(&mut out, "L", &t.laplacian);
    matrix_block(&mut out, "H = L + B", &t.grounded);

    match t.laplacian_eigenvalues() {
        Ok(ev) => {
            let list: Vec<String> = ev
                .iter()
                .map(|c| {
                    let re = if c.re.abs() < 1e-12 { 0.0 } else { c.re };
                    if c.im.abs() < 1e-12 {
                        format!("{re:.6}")
                    } else {
                        format!("{re:.6}{:+.6}i", c.im)
                    }
                })
                .collect();
            let _ = writeln!(out, "eigenvalues(L) = [{}]", list.join(", "));
            match ev.get(1) {
                Some(l2) => {
                    let _ = writeln!(out, "lambda2 = {:.6}", l2.re);
                }
                None => {
                    let _ = writeln!(out, "lambda2 = n/a");
                }
            }
        }
        Err(e) => {
            let _ = writeln!(out, "eigenvalues(L): {e}");
        }
    }
    let _ = writeln!(out, "balanced = {}", t.is_balanced());
    let _ = writeln!(out, "leader-rooted spanning tree = {}", t.has_leader_rooted_spanning_tree());
    match t.grounded_inverse() {
        Ok(_) => {
            let _ = writeln!(out, "H invertible = true");
        }
        Err(e) => {
            let _ = writeln!(out, "H invertible = false ({e})");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::paper_example;

    #[test]
    fn example_report() {
        let (adjacency, pinning) = paper_example();
        let r = topology_report(&TopologySpec { adjacency, pinning }).unwrap();
        assert!(r.contains("L =\n  [   1    0   -1    0]\n  [   0    0    0    0]\n  [   0   -1    1    0]\n  [   0    0   -1    1]"));
        assert!(r.contains("H = L + B =\n  [   2    0   -1    0]\n  [   0    1    0    0]\n  [   0   -1    1    0]\n  [   0    0   -1    1]"));
        assert!(r.contains("eigenvalues(L) = [0.000000, 1.000000, 1.000000, 1.000000]"));
        assert!(r.contains("lambda2 = 1.000000"));
        assert!(r.contains("balanced = false"));
        assert!(r.contains("leader-rooted spanning tree = true"));
        assert!(r.contains("H invertible = true"));
    }

    #[test]
    fn mutual_pair_is_balanced_but_unreachable() {
        let r = topology_report(&TopologySpec {
            adjacency: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            pinning: vec![0.0, 0.0],
        })
        .unwrap();
        assert!(r.contains("balanced = true"));
        assert!(r.contains("leader-rooted spanning tree = false"));
        assert!(r.contains("H invertible = false"));
    }
}
