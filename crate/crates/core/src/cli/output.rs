//! CSV emission.
//!
//! * `trajectory.csv`: `t,x0,x1..xN,u1..uN,sigma1..sigmaN,e1..eN,V`
//! * `events.csv`: `agent,k,t_k,T_k` (`T_k` empty for an agent's last event)
//! * `diagnostics.csv`: one row per follower
//!
//! Numbers are written in scientific notation with 17 significant digits
//! (override with `ETSMC_CSV_DIGITS`, 1..=17); every line ends with `\n`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::engine::{inter_event_stats, RunOutput, TrajectoryLog};

pub const DIGITS_ENV: &str = "ETSMC_CSV_DIGITS";
pub const DEFAULT_DIGITS: usize = 17;

pub fn digits_from_env() -> usize {
    std::env::var(DIGITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|d| (1..=17).contains(d))
        .unwrap_or(DEFAULT_DIGITS)
}

pub fn fmt_num(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), v)
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

pub fn trajectory_header(n: usize) -> String {
    let mut cols = vec!["t".to_string(), "x0".to_string()];
    for prefix in ["x", "u", "sigma", "e"] {
        cols.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    cols.push("V".into());
    cols.join(",")
}

pub fn write_trajectory<W: Write>(mut w: W, log: &TrajectoryLog, digits: usize) -> io::Result<()> {
    writeln!(w, "{}", trajectory_header(log.n_followers))?;
    for r in &log.records {
        let values = [r.t, r.x0]
            .into_iter()
            .chain(r.x.iter().copied())
            .chain(r.u.iter().copied())
            .chain(r.sigma.iter().copied())
            .chain(r.e.iter().copied())
            .chain(std::iter::once(r.v));
        writeln!(w, "{}", join(values.map(|v| fmt_num(v, digits))))?;
    }
    Ok(())
}

pub fn write_events<W: Write>(mut w: W, out: &RunOutput, digits: usize) -> io::Result<()> {
    writeln!(w, "agent,k,t_k,T_k")?;
    let events = &out.events;
    for (i, list) in events.per_agent.iter().enumerate() {
        let gaps = events.inter_event_times(i);
        for (k, ev) in list.iter().enumerate() {
            let gap = gaps.get(k).map(|g| fmt_num(*g, digits)).unwrap_or_default();
            writeln!(w, "{},{},{},{}", i + 1, k, fmt_num(ev.t, digits), gap)?;
        }
    }
    Ok(())
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| fmt_num(x, digits)).unwrap_or_default()
}

pub fn write_diagnostics<W: Write>(mut w: W, out: &RunOutput, digits: usize) -> io::Result<()> {
    writeln!(
        w,
        "agent,eta_measured,reaching_samples,reaching_violations,reaching_pass,gain_sup,K,gain_pass,events,min_T,mean_T,max_T,min_T_ge_dt,late_window_max_events"
    )?;
    let d = &out.diagnostics;
    let stats = inter_event_stats(&out.events);
    for (i, s) in stats.iter().enumerate() {
        let (eta, samples, violations, pass) = match &d.reaching[i] {
            Some(r) => (
                fmt_num(r.eta_measured, digits),
                r.samples.to_string(),
                r.violations.len().to_string(),
                r.passes(),
            ),
            None => (String::new(), "0".into(), "0".into(), false),
        };
        let sup = d.gain.per_agent.get(i).copied().unwrap_or(d.gain.supremum);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.agent,
            eta,
            samples,
            violations,
            pass,
            fmt_num(sup, digits),
            fmt_num(d.gain.k, digits),
            d.gain.k > sup,
            s.count,
            opt(s.min, digits),
            opt(s.mean, digits),
            opt(s.max, digits),
            s.certifies_min_dt(out.events.dt),
            d.late_window_max_events[i],
        )?;
    }
    Ok(())
}

/// Writes the three CSV files into `out_dir` (created if missing).
pub fn emit_csv(out: &RunOutput, out_dir: impl AsRef<Path>) -> io::Result<Vec<PathBuf>> {
    emit_csv_with_digits(out, out_dir, digits_from_env())
}

pub fn emit_csv_with_digits(out: &RunOutput, out_dir: impl AsRef<Path>, digits: usize) -> io::Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = [
        dir.join("trajectory.csv"),
        dir.join("events.csv"),
        dir.join("diagnostics.csv"),
    ];
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &out.trajectory, digits)?;
    fs::write(&paths[0], &buf)?;
    buf.clear();
    write_events(&mut buf, out, digits)?;
    fs::write(&paths[1], &buf)?;
    buf.clear();
    write_diagnostics(&mut buf, out, digits)?;
    fs::write(&paths[2], &buf)?;
    Ok(paths.to_vec())
}

/// Reads numeric rows back from `trajectory.csv` text.
pub fn parse_trajectory_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|c| c.parse::<f64>().map_err(|e| format!("{c:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456.789, 0.0, -0.0, f64::MIN_POSITIVE] {
            let s = fmt_num(v, 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_num(10.0, 17), "1.0000000000000000e1");
        assert_eq!(fmt_num(0.25, 3), "2.50e-1");
    }

    #[test]
    fn header_layout() {
        assert_eq!(trajectory_header(2), "t,x0,x1,x2,u1,u2,sigma1,sigma2,e1,e2,V");
    }
}
