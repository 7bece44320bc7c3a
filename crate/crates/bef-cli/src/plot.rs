//! Static SVG emission. No display dependency; output is deterministic and
//! byte-diffable for fixed input.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"18\" font-family=\"monospace\" font-size=\"14\" ",
            "text-anchor=\"middle\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = title
    )
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, y_tick_fmt: &dyn Fn(f64) -> String) {
    let _ = write!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(WIDTH - MARGIN_L - MARGIN_R),
        fmt(HEIGHT - MARGIN_T - MARGIN_B)
    );
    let n_ticks = 5usize;
    for i in 0..=n_ticks {
        let t = i as f64 / n_ticks as f64;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let xp = f.x(xv);
        let yp = f.y(yv);
        let _ = write!(
            out,
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/>\n",
            x = fmt(xp),
            b = fmt(HEIGHT - MARGIN_B),
            b2 = fmt(HEIGHT - MARGIN_B + 5.0)
        );
        let _ = write!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{v}</text>\n",
            x = fmt(xp),
            y = fmt(HEIGHT - MARGIN_B + 18.0),
            v = format!("{xv:.1}")
        );
        let _ = write!(
            out,
            "<line x1=\"{l}\" y1=\"{y}\" x2=\"{l2}\" y2=\"{y}\" stroke=\"black\"/>\n",
            l = fmt(MARGIN_L - 5.0),
            l2 = fmt(MARGIN_L),
            y = fmt(yp)
        );
        let _ = write!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{v}</text>\n",
            x = fmt(MARGIN_L - 8.0),
            y = fmt(yp + 4.0),
            v = y_tick_fmt(yv)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{t}</text>\n",
        x = fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        y = fmt(HEIGHT - 12.0),
        t = x_label
    );
    let _ = write!(
        out,
        "<text x=\"16\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {y})\">{t}</text>\n",
        y = fmt(HEIGHT / 2.0),
        t = y_label
    );
}

fn legend(out: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 16.0 * i as f64;
        let _ = write!(
            out,
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{c}\" stroke-width=\"2\"/>\n",
            x1 = fmt(WIDTH - MARGIN_R - 150.0),
            x2 = fmt(WIDTH - MARGIN_R - 120.0),
            y = fmt(y),
            c = PALETTE[i % PALETTE.len()]
        );
        let _ = write!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\">{label}</text>\n",
            x = fmt(WIDTH - MARGIN_R - 114.0),
            y = fmt(y + 4.0),
            label = label
        );
    }
}

/// Log-linear decay plot of `mu_hat(r)` for one or more models. Values at or
/// below the noise floor are drawn as open markers pinned to the floor line,
/// so an all-zero profile still renders without a log-domain error.
pub fn mu_profile_svg(series: &[Series], noise_floor: f64) -> String {
    let floor_log = noise_floor.log10();
    let mut x_max = 1.0f64;
    let mut y_max = floor_log + 1.0;
    for s in series {
        for &(r, mu) in &s.points {
            x_max = x_max.max(r);
            if mu > noise_floor {
                y_max = y_max.max(mu.log10());
            }
        }
    }
    let frame = Frame {
        x0: 0.0,
        x1: x_max + 1.0,
        y0: floor_log - 0.5,
        y1: y_max + 0.5,
    };
    let mut out = header("boundary-effect decay (log10 mu_hat vs r)");
    axes(
        &mut out,
        &frame,
        "radius r",
        "log10 mu_hat(r)",
        &|v| format!("{v:.1}"),
    );
    // clamped-floor guide line
    let _ = write!(
        out,
        "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n",
        x1 = fmt(frame.x(frame.x0)),
        x2 = fmt(frame.x(frame.x1)),
        y = fmt(frame.y(floor_log)),
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let line: Vec<String> = s
            .points
            .iter()
            .filter(|&&(_, mu)| mu > noise_floor)
            .map(|&(r, mu)| format!("{},{}", fmt(frame.x(r)), fmt(frame.y(mu.log10()))))
            .collect();
        if line.len() >= 2 {
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                line.join(" ")
            );
        }
        for &(r, mu) in &s.points {
            if mu > noise_floor {
                let _ = write!(
                    out,
                    "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>\n",
                    x = fmt(frame.x(r)),
                    y = fmt(frame.y(mu.log10()))
                );
            } else {
                let _ = write!(
                    out,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"6\" height=\"6\" fill=\"white\" stroke=\"{color}\"/>\n",
                    x = fmt(frame.x(r) - 3.0),
                    y = fmt(frame.y(floor_log) - 3.0)
                );
            }
        }
    }
    let labels: Vec<&str> = series.iter().map(|s| s.label.as_str()).collect();
    legend(&mut out, &labels);
    out.push_str("</svg>\n");
    out
}

/// Scatter of spectral gap against fitted exponential decay rate. Rows
/// without a finite rate are skipped.
pub fn gap_kappa_svg(points: &[(String, f64, Option<f64>)]) -> String {
    let finite: Vec<(&str, f64, f64)> = points
        .iter()
        .filter_map(|(l, g, k)| k.map(|k| (l.as_str(), *g, k)))
        .collect();
    let (mut gx, mut ky) = (1e-3f64, 1e-3f64);
    for &(_, g, k) in &finite {
        gx = gx.max(g);
        ky = ky.max(k);
    }
    let frame = Frame {
        x0: 0.0,
        x1: gx * 1.1,
        y0: 0.0,
        y1: ky * 1.1,
    };
    let mut out = header("spectral gap vs decay rate");
    axes(&mut out, &frame, "gap", "kappa", &|v| format!("{v:.2}"));
    for (i, &(label, g, k)) in finite.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"{color}\"/>\n",
            x = fmt(frame.x(g)),
            y = fmt(frame.y(k))
        );
        let _ = write!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"10\">{label}</text>\n",
            x = fmt(frame.x(g) + 6.0),
            y = fmt(frame.y(k) - 6.0),
            label = label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Entanglement-entropy growth curves `S` vs system size.
pub fn entropy_svg(series: &[Series]) -> String {
    let mut x_max = 1.0f64;
    let mut y_max = 0.1f64;
    let mut x_min = f64::MAX;
    for s in series {
        for &(n, ent) in &s.points {
            x_max = x_max.max(n);
            x_min = x_min.min(n);
            y_max = y_max.max(ent);
        }
    }
    if x_min == f64::MAX {
        x_min = 0.0;
    }
    let frame = Frame {
        x0: (x_min - 1.0).max(0.0),
        x1: x_max + 1.0,
        y0: 0.0,
        y1: y_max * 1.15,
    };
    let mut out = header("entanglement entropy growth");
    axes(&mut out, &frame, "system size n", "S [bits]", &|v| {
        format!("{v:.2}")
    });
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let line: Vec<String> = s
            .points
            .iter()
            .map(|&(n, ent)| format!("{},{}", fmt(frame.x(n)), fmt(frame.y(ent))))
            .collect();
        if line.len() >= 2 {
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                line.join(" ")
            );
        }
        for &(n, ent) in &s.points {
            let _ = write!(
                out,
                "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>\n",
                x = fmt(frame.x(n)),
                y = fmt(frame.y(ent))
            );
        }
    }
    let labels: Vec<&str> = series.iter().map(|s| s.label.as_str()).collect();
    legend(&mut out, &labels);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_profile() -> Vec<Series> {
        vec![
            Series {
                label: "gapped".into(),
                points: vec![
                    (1.0, 0.2),
                    (2.0, 0.05),
                    (3.0, 0.012),
                    (4.0, 3e-3),
                    (5.0, 0.0),
                ],
            },
            Series {
                label: "critical".into(),
                points: vec![(1.0, 0.3), (2.0, 0.12), (3.0, 0.05), (4.0, 0.02), (5.0, 9e-3)],
            },
        ]
    }

    #[test]
    fn mu_profile_matches_golden_bytes() {
        let svg = mu_profile_svg(&fixed_profile(), 1e-7);
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/mu_profile.svg");
        if std::env::var("UPDATE_GOLDEN").is_ok() {
            std::fs::create_dir_all(std::path::Path::new(path).parent().unwrap()).unwrap();
            std::fs::write(path, &svg).unwrap();
        }
        let golden = std::fs::read_to_string(path).expect("golden file present");
        assert_eq!(svg, golden, "svg output drifted from the golden file");
    }

    #[test]
    fn all_zero_profiles_render_on_the_floor_line() {
        let svg = mu_profile_svg(
            &[Series {
                label: "decoupled".into(),
                points: vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
            }],
            1e-7,
        );
        assert!(svg.contains("<rect"), "expected clamped-floor markers");
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn gap_scatter_skips_infinite_rates() {
        let svg = gap_kappa_svg(&[
            ("a".into(), 2.0, Some(1.1)),
            ("b".into(), 2.6, None),
        ]);
        assert!(svg.contains("a") && !svg.contains(">b<"));
    }
}
