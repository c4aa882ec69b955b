use super::episode::EpisodeResult;
use crate::worldmap::{CellCode, OccupancyGrid, Pose};
use std::fmt::Write;

const CELL_PX: f64 = 6.0;
const TRUE_COLOR: &str = "#d62728";
const EST_COLOR: &str = "#2ca02c";

/// SVG drawing of an episode over its map: occupied cells black, unexplored
/// cells gray, true poses as red arrows, estimates as green arrows, and the
/// two final poses circled. One `<g class="arrow ...">` per pose.
pub fn render_svg(result: &EpisodeResult, grid: &OccupancyGrid) -> String {
    let (w, h) = (grid.width(), grid.height());
    let (wpx, hpx) = (w as f64 * CELL_PX, h as f64 * CELL_PX);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" height="{hpx}" viewBox="0 0 {wpx} {hpx}">"#
    )
    .unwrap();
    writeln!(
        s,
        "<title>{} / {} / {} / seed {}</title>",
        escape(&result.policy),
        result.task,
        escape(&result.map_id),
        result.seed
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{wpx}" height="{hpx}" fill="white"/>"#).unwrap();

    s.push_str("<g class=\"map\">\n");
    for row in 0..h {
        let y = (h - 1 - row) as f64 * CELL_PX;
        let mut col = 0;
        while col < w {
            let code = grid.get(col, row);
            let run_start = col;
            while col < w && grid.get(col, row) == code {
                col += 1;
            }
            let fill = match code {
                CellCode::Free => continue,
                CellCode::Occupied => "black",
                CellCode::Unexplored => "#bbbbbb",
            };
            writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{}" height="{CELL_PX}" fill="{fill}"/>"#,
                run_start as f64 * CELL_PX,
                (col - run_start) as f64 * CELL_PX
            )
            .unwrap();
        }
    }
    s.push_str("</g>\n");

    let to_px = |p: &Pose| {
        let (gx, gy) = grid.world_to_grid(p.x, p.y);
        (gx * CELL_PX, (h as f64 - gy) * CELL_PX, p.phi - grid.heading_offset())
    };
    for r in &result.steps {
        arrow(&mut s, "true", TRUE_COLOR, to_px(&r.true_pose));
        arrow(&mut s, "estimate", EST_COLOR, to_px(&r.est_pose));
    }
    if let Some(last) = result.steps.last() {
        for (class, color, p) in [
            ("true", TRUE_COLOR, &last.true_pose),
            ("estimate", EST_COLOR, &last.est_pose),
        ] {
            let (x, y, _) = to_px(p);
            writeln!(
                s,
                r#"<circle class="final {class}" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                2.5 * CELL_PX
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn arrow(s: &mut String, class: &str, color: &str, (x, y, phi): (f64, f64, f64)) {
    let len = 2.5 * CELL_PX;
    // screen y points down
    let (dx, dy) = (phi.cos(), -phi.sin());
    let (tx, ty) = (x + len * dx, y + len * dy);
    let head = 0.8 * CELL_PX;
    let (px, py) = (-dy, dx);
    writeln!(
        s,
        r#"<g class="arrow {class}" stroke="{color}" fill="{color}"><line x1="{x:.2}" y1="{y:.2}" x2="{tx:.2}" y2="{ty:.2}" stroke-width="1.2"/><polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/></g>"#,
        tx + head * dx,
        ty + head * dy,
        tx + head * px,
        ty + head * py,
        tx - head * px,
        ty - head * py
    )
    .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
