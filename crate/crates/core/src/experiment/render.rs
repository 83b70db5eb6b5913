//! Static SVG plots. Coordinates are printed with fixed precision so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;

use crate::env::Replay;
use crate::model::Side;
use crate::runner::RunManifest;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn open(out: &mut String, w: f64, h: f64, comment: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<!-- {} -->", comment.replace("--", "- -"));
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One-frame view of a duel: every entity's path, with one marker per
/// timestep. The first entity (the ball in Pong) is drawn on top.
pub fn replay_svg(replay: &Replay) -> String {
    let (w, h, m) = (480.0, 480.0, 20.0);
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in replay.positions.iter().flatten() {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let sx = |x: f64| m + (x - x0) / span * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / span * (h - 2.0 * m);

    let mut out = String::new();
    open(&mut out, w, h, &replay.header);
    let _ = writeln!(
        out,
        r##"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        w - 2.0 * m,
        h - 2.0 * m
    );
    for (e, name) in replay.entities.iter().enumerate().rev() {
        let color = PALETTE[e % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="entity" id="{}">"#, escape(name));
        let pts: Vec<String> = replay
            .positions
            .iter()
            .map(|row| format!("{:.2},{:.2}", sx(row[e][0]), sy(row[e][1])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-opacity="0.35"/>"#,
            pts.join(" ")
        );
        for (step, row) in replay.positions.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<circle class="marker" data-step="{step}" cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                sx(row[e][0]),
                sy(row[e][1])
            );
        }
        out.push_str("</g>\n");
    }
    for (step, side) in replay.points() {
        let p = replay.positions[step][0];
        let color = if side == Side::Red {
            "#d62728"
        } else {
            "#1f77b4"
        };
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="{color}" stroke-width="2"/>"#,
            sx(p[0]),
            sy(p[1])
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{m}" y="14" font-family="sans-serif" font-size="12">{} duel, {} steps</text>"#,
        replay.env,
        replay.positions.len()
    );
    out.push_str("</svg>\n");
    out
}

/// Total filled cells per generation, one curve per run.
pub fn archive_size_svg(runs: &[(String, RunManifest<f64>)], plan_hash: &str) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 160.0, 30.0, 40.0);
    let n_gen = runs
        .iter()
        .map(|(_, m)| m.generations.len())
        .max()
        .unwrap_or(0)
        .max(2);
    let y_max = runs
        .iter()
        .flat_map(|(_, m)| {
            m.generations
                .iter()
                .map(|g| g.archives.iter().map(|a| a.cells).sum::<usize>())
        })
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let sx = |g: usize| ml + (g - 1) as f64 / (n_gen - 1) as f64 * pw;
    let sy = |c: f64| mt + ph - c / y_max * ph;

    let mut out = String::new();
    open(
        &mut out,
        w,
        h,
        &format!("gameqd {} plan_hash={plan_hash}", env!("CARGO_PKG_VERSION")),
    );
    let _ = writeln!(
        out,
        r##"<g stroke="#333"><line x1="{ml}" y1="{}" x2="{}" y2="{}"/><line x1="{ml}" y1="{mt}" x2="{ml}" y2="{}"/></g>"##,
        mt + ph,
        ml + pw,
        mt + ph,
        mt + ph
    );
    for g in 1..=n_gen {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{g}</text>"#,
            sx(g),
            mt + ph + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">generation</text>"#,
        ml + pw / 2.0,
        h - 6.0
    );
    for frac in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.0}</text>"#,
            ml - 6.0,
            sy(frac * y_max) + 4.0,
            frac * y_max
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {:.2})" text-anchor="middle">filled cells</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );
    for (i, (name, m)) in runs.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(usize, f64)> = m
            .generations
            .iter()
            .map(|g| {
                (
                    g.generation,
                    g.archives.iter().map(|a| a.cells).sum::<usize>() as f64,
                )
            })
            .collect();
        let line: Vec<String> = pts
            .iter()
            .map(|&(g, c)| format!("{:.2},{:.2}", sx(g), sy(c)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="run" data-run="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(name),
            line.join(" ")
        );
        for &(g, c) in &pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(g),
                sy(c)
            );
        }
        let ly = mt + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            ml + pw + 10.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
