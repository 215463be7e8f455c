//! Deterministic SVG rendering: the triangular lattice drawn with sites at
//! `(x s + y s/2, y s sqrt(3)/2)`, particles as circles colored by
//! orientation from a fixed q-palette.

use sops_core::config::Snapshot;

const SCALE: f64 = 14.0;
const RADIUS: f64 = 4.5;

fn coords(x: u32, y: u32) -> (f64, f64) {
    (x as f64 * SCALE + y as f64 * SCALE / 2.0, y as f64 * SCALE * 3f64.sqrt() / 2.0)
}

/// Fixed palette: evenly spaced hues per orientation.
pub fn palette_color(theta: u8, q: u8) -> String {
    let hue = 360.0 * theta as f64 / q as f64;
    format!("hsl({hue:.0},70%,45%)")
}

pub fn render_svg(snapshot: &Snapshot) -> String {
    let l = snapshot.l;
    let (w, h) = coords(l - 1, l - 1);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{:.1} {:.1} {:.1} {:.1}\">\n",
        w + 2.0 * SCALE,
        h + 2.0 * SCALE,
        -SCALE,
        -SCALE,
        w + 2.0 * SCALE,
        h + 2.0 * SCALE
    ));
    if let Some(hash) = &snapshot.config_hash {
        out.push_str(&format!("<!-- config_hash={hash} -->\n"));
    }
    out.push_str("<g stroke=\"#cccccc\" stroke-width=\"0.5\">\n");
    // Lattice edges along the three axes, seam edges omitted for clarity.
    for y in 0..l {
        for x in 0..l {
            let (px, py) = coords(x, y);
            if x + 1 < l {
                let (qx, qy) = coords(x + 1, y);
                out.push_str(&line(px, py, qx, qy));
            }
            if y + 1 < l {
                let (qx, qy) = coords(x, y + 1);
                out.push_str(&line(px, py, qx, qy));
            }
            if x + 1 < l && y + 1 < l {
                let (qx, qy) = coords(x + 1, y + 1);
                out.push_str(&line(px, py, qx, qy));
            }
        }
    }
    out.push_str("</g>\n<g stroke=\"black\" stroke-width=\"0.6\">\n");
    let mut particles = snapshot.particles.clone();
    particles.sort_by_key(|p| (p.y, p.x));
    for p in &particles {
        let (px, py) = coords(p.x, p.y);
        out.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"{RADIUS:.1}\" fill=\"{}\"/>\n",
            palette_color(p.theta, snapshot.q)
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn line(x1: f64, y1: f64, x2: f64, y2: f64) -> String {
    format!("<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>\n")
}
