use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::data::{GraspSet, Layout, PoseSet, TriMesh};
use crate::se3::Pose;

/// Optional markers drawn over the board.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overlays<'a> {
    pub poses: Option<&'a PoseSet>,
    /// Grasps drawn with the hand approach axis.
    pub grasps: Option<(&'a GraspSet, Vector3<f64>)>,
}

const MARGIN: f64 = 20.0;
/// Pixels per meter.
const SCALE: f64 = 1000.0;
const ARROW: f64 = 25.0;

fn cross(o: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    (a - o).perp(&(b - o))
}

/// Counter-clockwise hull by monotone chain.
fn hull_2d(mut pts: Vec<Vector2<f64>>) -> Vec<Vector2<f64>> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Silhouette of the mesh on the board plane.
fn footprint(mesh: &TriMesh, pose: &Pose) -> Vec<Vector2<f64>> {
    hull_2d(
        mesh.vertices
            .iter()
            .map(|v| {
                let p = pose.transform_point(v);
                Vector2::new(p.x, p.y)
            })
            .collect(),
    )
}

struct Canvas {
    height: f64,
}

impl Canvas {
    /// Board meters to SVG pixels, y up on the board and down in SVG.
    fn px(&self, p: Vector2<f64>) -> (f64, f64) {
        (MARGIN + p.x * SCALE, self.height - MARGIN - p.y * SCALE)
    }
}

fn arrow(out: &mut String, canvas: &Canvas, class: &str, pose: &Pose, axis: &Vector3<f64>) {
    let start = Vector2::new(pose.position.x, pose.position.y);
    let d = pose.rotation * axis;
    let dir = Vector2::new(d.x, d.y);
    let (x0, y0) = canvas.px(start);
    let _ = writeln!(out, r#"  <circle class="{class}" cx="{x0:.1}" cy="{y0:.1}" r="3"/>"#);
    if dir.norm() > 1e-6 {
        let end = start + dir.normalize() * (ARROW / SCALE);
        let (x1, y1) = canvas.px(end);
        let _ = writeln!(
            out,
            r#"  <line class="{class}" x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y1:.1}"/>"#
        );
    }
}

/// Top-down drawing of the board: region grid, object footprints and the
/// optional pose or grasp markers.
pub fn render_layout(layout: &Layout, meshes: &BTreeMap<String, TriMesh>, overlays: &Overlays) -> String {
    let grid = &layout.grid;
    let width = grid.width * SCALE + 2.0 * MARGIN;
    let height = grid.height * SCALE + 2.0 * MARGIN;
    let canvas = Canvas { height };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(
        out,
        "  <style>.region {{ fill: none; stroke: #888; }} .board {{ fill: #f4f4f0; stroke: #000; }} \
         .object {{ fill: #6a9fd4; fill-opacity: 0.6; stroke: #1d4f80; }} .pose {{ fill: #c33; stroke: #c33; }} \
         .grasp {{ fill: #393; stroke: #393; }} text {{ font: 11px sans-serif; }}</style>"
    );
    let _ = writeln!(out, "  <title>Layout {}</title>", layout.id);
    let (bx, by) = canvas.px(Vector2::new(0.0, grid.height));
    let _ = writeln!(
        out,
        r#"  <rect class="board" x="{bx:.1}" y="{by:.1}" width="{:.1}" height="{:.1}"/>"#,
        grid.width * SCALE,
        grid.height * SCALE
    );
    for id in grid.region_ids() {
        let (x0, y0, x1, y1) = grid.cell_bounds(id);
        let (px, py) = canvas.px(Vector2::new(x0, y1));
        let _ = writeln!(
            out,
            r#"  <rect class="region" x="{px:.1}" y="{py:.1}" width="{:.1}" height="{:.1}"/>"#,
            (x1 - x0) * SCALE,
            (y1 - y0) * SCALE
        );
        let _ = writeln!(out, r#"  <text x="{:.1}" y="{:.1}">R{}</text>"#, px + 4.0, py + 14.0, id.0);
    }
    for obj in &layout.objects {
        let Some(mesh) = meshes.get(&obj.name) else {
            log::warn!("object '{}' has no mesh, footprint skipped", obj.name);
            continue;
        };
        let points: Vec<String> = footprint(mesh, &obj.pose)
            .into_iter()
            .map(|p| {
                let (x, y) = canvas.px(p);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"  <polygon class="object" points="{}"><title>{}</title></polygon>"#,
            points.join(" "),
            obj.name.replace('&', "&amp;").replace('<', "&lt;")
        );
    }
    if let Some(set) = overlays.poses {
        for p in &set.poses {
            arrow(&mut out, &canvas, "pose", &p.pose, &Vector3::x());
        }
    }
    if let Some((set, axis)) = overlays.grasps {
        for record in set.objects.values() {
            for t in record.trials().unwrap_or(&[]) {
                arrow(&mut out, &canvas, "grasp", &t.pose, &axis);
            }
        }
    }
    let _ = writeln!(out, "</svg>");
    out
}
