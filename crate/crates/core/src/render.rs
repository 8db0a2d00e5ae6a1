//! SVG trajectory plots: cells across, time downward, quality as a grey
//! background and the agent's path on top.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_err, Result};
use crate::fitness::EpisodeTrace;

const CELL_W: f64 = 10.0;
const ROW_H: f64 = 6.0;
const MARGIN: f64 = 10.0;

/// Steps shown in trajectory figures.
pub const FIGURE_WINDOW: usize = 56;

/// Renders `trace`, cut to `window` steps when given. Identical traces give
/// identical bytes.
pub fn render_svg(trace: &EpisodeTrace, window: Option<usize>) -> Result<String> {
    let env = trace.env.build()?;
    let steps = window.map_or(trace.steps, |w| w.min(trace.steps));
    let n = env.cells();
    let width = 2.0 * MARGIN + n as f64 * CELL_W;
    let plot_h = (steps.max(1)) as f64 * ROW_H;
    let height = 2.0 * MARGIN + plot_h;
    let x = |p: usize| MARGIN + (p as f64 + 0.5) * CELL_W;
    let y = |t: usize| MARGIN + t as f64 * ROW_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, &q) in env.quality().iter().enumerate() {
        let level = ((q + 1.0) * 0.5 * 255.0).round().clamp(0.0, 255.0) as u8;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="rgb({level},{level},{level})"/>"#,
            MARGIN + i as f64 * CELL_W,
            MARGIN,
            CELL_W,
            plot_h
        );
    }

    let positions = &trace.positions[..=steps];
    if steps == 0 {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="red"/>"#,
            x(positions[0]),
            y(0)
        );
    } else {
        let points: Vec<String> = positions
            .iter()
            .enumerate()
            .map(|(t, &p)| format!("{:.1},{:.1}", x(p), y(t)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
            points.join(" ")
        );
        for &t in trace.switch_times.iter().filter(|&&t| t <= steps) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="blue"/>"#,
                x(positions[t]),
                y(t)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_svg(
    trace: &EpisodeTrace,
    window: Option<usize>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(trace, window)?).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{Controller, HandCodedController, MoveMode};
    use crate::fitness::run_episode;
    use crate::world::{Environment, Orientation};

    struct Still;

    impl Controller for Still {
        fn reset(&mut self) {}
        fn act(&mut self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    fn env() -> Environment {
        Environment::erf(40, Orientation::Normal).unwrap()
    }

    #[test]
    fn identical_traces_identical_bytes() {
        let a = run_episode(
            &mut HandCodedController::default(),
            &env(),
            250,
            20,
            MoveMode::AlwaysMove,
        )
        .unwrap();
        let b = a.clone();
        assert_eq!(
            render_svg(&a, Some(56)).unwrap(),
            render_svg(&b, Some(56)).unwrap()
        );
        let svg = render_svg(&a, Some(56)).unwrap();
        assert_eq!(svg.matches("<rect").count(), 41);
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn empty_trace_is_a_point() {
        let tr = run_episode(&mut Still, &env(), 0, 20, MoveMode::WithRest).unwrap();
        let svg = render_svg(&tr, None).unwrap();
        assert!(!svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn stationary_trace_is_vertical() {
        let tr = run_episode(&mut Still, &env(), 10, 20, MoveMode::WithRest).unwrap();
        let svg = render_svg(&tr, None).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split('"').nth(1).unwrap();
        let xs: Vec<&str> = pts
            .split(' ')
            .map(|p| p.split(',').next().unwrap())
            .collect();
        assert_eq!(xs.len(), 11);
        assert!(xs.iter().all(|x| *x == "215.0"));
    }
}
