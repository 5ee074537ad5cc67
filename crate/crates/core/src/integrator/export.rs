//! CSV output for trajectories and their events.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that every value round-trips exactly.

use std::io::{self, Write};

use super::{EventRecord, SegmentEnd, Trajectory};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn state_header(n: usize) -> String {
    (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn state_row(x: &[f64]) -> String {
    x.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

/// Columns: `t, x1..xn, mode, segment_index`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let n = traj.initial_state.len();
    writeln!(out, "t,{},mode,segment_index", state_header(n))?;
    for (k, seg) in traj.segments.iter().enumerate() {
        for (t, x) in seg.times.iter().zip(&seg.states) {
            writeln!(out, "{},{},{},{}", fmt_f64(*t), state_row(x), seg.mode.code(), k)?;
        }
    }
    Ok(())
}

/// All events of the trajectory, including the final one, in time order.
pub fn event_list(traj: &Trajectory) -> Vec<&EventRecord> {
    let mut events: Vec<&EventRecord> = traj
        .segments
        .iter()
        .filter_map(|s| match &s.terminal_event {
            SegmentEnd::Event(e) => Some(e),
            SegmentEnd::End => None,
        })
        .collect();
    if events.last().copied() != Some(&traj.final_event) {
        events.push(&traj.final_event);
    }
    events
}

/// Columns: `kind, time, x1..xn`.
pub fn write_events_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let n = traj.initial_state.len();
    writeln!(out, "kind,time,{}", state_header(n))?;
    for ev in event_list(traj) {
        writeln!(out, "{},{},{}", ev.kind.name(), fmt_f64(ev.time), state_row(&ev.state))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::integrator::{integrate, IntegratorConfig};

    #[test]
    fn headers_and_row_shape() {
        let sys = builtin::paper_4d().to_system();
        let cfg = IntegratorConfig {
            t_max: 2.0,
            ..Default::default()
        };
        let traj = integrate(&sys, &[1.0, 0.0, 0.0, 0.0], &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,x4,mode,segment_index");
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 7);
        assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0"));

        let mut buf = Vec::new();
        write_events_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,time,x1,x2,x3,x4");
        assert!(lines[1].starts_with("SurfaceHit,"));
        assert!(lines.last().unwrap().starts_with("HorizonReached,"));
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
