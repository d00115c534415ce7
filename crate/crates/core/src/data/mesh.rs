//! Triangle meshes: ASCII OFF and ASCII PLY loading, validation and mass
//! properties.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{read_text, DataError};

const DEGENERATE_AREA: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    /// Uniform-density center of mass, or the vertex centroid when the mesh
    /// does not enclose a volume.
    pub center_of_mass: Vector3<f64>,
    /// Largest distance from the center of mass to the surface.
    pub max_radius: f64,
    pub watertight: bool,
    /// Set when the center of mass fell back to the vertex centroid.
    pub centroid_fallback: bool,
}

impl TriMesh {
    /// Validates indices, drops zero-area triangles, orients a closed mesh
    /// outward and computes mass properties.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[u32; 3]>, file: &str) -> Result<Self, DataError> {
        let n = vertices.len();
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(DataError::Format {
                file: file.into(),
                line: 0,
                message: format!("non-finite vertex {v:?}"),
            });
        }
        for t in &triangles {
            if let Some(&bad) = t.iter().find(|&&i| i as usize >= n) {
                return Err(DataError::Format {
                    file: file.into(),
                    line: 0,
                    message: format!("triangle references vertex {bad} of {n}"),
                });
            }
        }
        let mut triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                (b - a).cross(&(c - a)).norm() * 0.5 > DEGENERATE_AREA
            })
            .collect();
        if triangles.is_empty() || !spans_volume(&vertices) {
            return Err(DataError::DegenerateMesh {
                file: file.into(),
                message: "fewer than 4 non-coplanar vertices".into(),
            });
        }
        let watertight = is_closed_manifold(&triangles);
        let (volume, volume_centroid) = signed_volume(&vertices, &triangles);
        if watertight && volume < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
        let used = used_vertices(&triangles, n);
        let centroid_fallback = !watertight || volume.abs() < 1e-15;
        let center_of_mass = if centroid_fallback {
            let sum: Vector3<f64> = used.iter().map(|&i| vertices[i]).sum();
            sum / used.len() as f64
        } else {
            volume_centroid
        };
        let max_radius = used
            .iter()
            .map(|&i| (vertices[i] - center_of_mass).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            vertices,
            triangles,
            center_of_mass,
            max_radius,
            watertight,
            centroid_fallback,
        })
    }

    pub fn triangle(&self, i: usize) -> [Vector3<f64>; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    /// Unit normal following the counter-clockwise winding.
    pub fn triangle_normal(&self, i: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(i);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        (b - a).cross(&(c - a)).norm() * 0.5
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn volume(&self) -> f64 {
        signed_volume(&self.vertices, &self.triangles).0
    }

    pub fn transformed(&self, pose: &crate::se3::Pose) -> TriMesh {
        let vertices = self.vertices.iter().map(|v| pose.transform_point(v)).collect();
        TriMesh {
            vertices,
            triangles: self.triangles.clone(),
            center_of_mass: pose.transform_point(&self.center_of_mass),
            max_radius: self.max_radius,
            watertight: self.watertight,
            centroid_fallback: self.centroid_fallback,
        }
    }

    /// Axis-aligned box with full extents `size` centered at `center`.
    pub fn cuboid(size: Vector3<f64>, center: Vector3<f64>) -> TriMesh {
        let h = size / 2.0;
        let vertices: Vec<Vector3<f64>> = (0..8)
            .map(|i| {
                let sx = if i & 1 == 0 { -h.x } else { h.x };
                let sy = if i & 2 == 0 { -h.y } else { h.y };
                let sz = if i & 4 == 0 { -h.z } else { h.z };
                center + Vector3::new(sx, sy, sz)
            })
            .collect();
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriMesh::new(vertices, triangles, "<cuboid>").expect("cuboid with positive extents")
    }

    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn parse_off(text: &str, file: &str) -> Result<Self, DataError> {
        let mut lines = content_lines(text);
        let fmt_err = |line: usize, message: String| DataError::Format {
            file: file.into(),
            line,
            message,
        };
        let (ln, header) = lines.next().ok_or_else(|| fmt_err(1, "empty file".into()))?;
        let mut header_tokens: Vec<&str> = header.split_whitespace().collect();
        if header_tokens.first() != Some(&"OFF") {
            return Err(fmt_err(ln, "missing OFF header".into()));
        }
        header_tokens.remove(0);
        let counts_tokens: Vec<&str> = if header_tokens.is_empty() {
            let (_, l) = lines.next().ok_or_else(|| fmt_err(ln, "missing counts".into()))?;
            l.split_whitespace().collect()
        } else {
            header_tokens
        };
        let counts = counts_tokens
            .iter()
            .take(2)
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| fmt_err(ln, "invalid vertex/face counts".into()))?;
        if counts.len() < 2 {
            return Err(fmt_err(ln, "invalid vertex/face counts".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| fmt_err(0, "truncated vertex list".into()))?;
            let v = parse_floats(l, 3).ok_or_else(|| fmt_err(ln, format!("invalid vertex '{l}'")))?;
            vertices.push(Vector3::new(v[0], v[1], v[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = lines.next().ok_or_else(|| fmt_err(0, "truncated face list".into()))?;
            let idx = parse_polygon(l).ok_or_else(|| fmt_err(ln, format!("invalid face '{l}'")))?;
            if let Some(&bad) = idx.iter().find(|&&i| i as usize >= nv) {
                return Err(fmt_err(ln, format!("face references vertex {bad} of {nv}")));
            }
            fan(&idx, &mut triangles);
        }
        TriMesh::new(vertices, triangles, file)
    }

    pub fn parse_ply(text: &str, file: &str) -> Result<Self, DataError> {
        let fmt_err = |line: usize, message: String| DataError::Format {
            file: file.into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, "ply")) => {}
            _ => return Err(fmt_err(1, "missing ply magic".into())),
        }
        let mut nv = None;
        let mut nf = None;
        let mut current = "";
        let mut vertex_props: Vec<String> = Vec::new();
        loop {
            let (ln, l) = lines.next().ok_or_else(|| fmt_err(0, "unterminated header".into()))?;
            let tok: Vec<&str> = l.split_whitespace().collect();
            match tok.as_slice() {
                ["format", "ascii", _] => {}
                ["format", other, ..] => return Err(fmt_err(ln, format!("unsupported ply format '{other}'"))),
                ["comment", ..] | ["obj_info", ..] | [] => {}
                ["element", "vertex", n] => {
                    nv = Some(n.parse::<usize>().map_err(|_| fmt_err(ln, "bad vertex count".into()))?);
                    current = "vertex";
                }
                ["element", "face", n] => {
                    nf = Some(n.parse::<usize>().map_err(|_| fmt_err(ln, "bad face count".into()))?);
                    current = "face";
                }
                ["element", other, _] => return Err(fmt_err(ln, format!("unsupported element '{other}'"))),
                ["property", "list", ..] if current == "face" => {}
                ["property", _, name] if current == "vertex" => vertex_props.push(name.to_string()),
                ["property", ..] => return Err(fmt_err(ln, format!("unsupported property '{l}'"))),
                ["end_header"] => break,
                _ => return Err(fmt_err(ln, format!("unexpected header line '{l}'"))),
            }
        }
        let nv = nv.ok_or_else(|| fmt_err(0, "no vertex element".into()))?;
        let nf = nf.unwrap_or(0);
        let pos = |name: &str| {
            vertex_props
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| fmt_err(0, format!("vertex property '{name}' missing")))
        };
        let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
        let mut body = lines.filter(|(_, l)| !l.is_empty());
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = body.next().ok_or_else(|| fmt_err(0, "truncated vertex list".into()))?;
            let v = parse_floats(l, vertex_props.len()).ok_or_else(|| fmt_err(ln, format!("invalid vertex '{l}'")))?;
            vertices.push(Vector3::new(v[ix], v[iy], v[iz]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = body.next().ok_or_else(|| fmt_err(0, "truncated face list".into()))?;
            let idx = parse_polygon(l).ok_or_else(|| fmt_err(ln, format!("invalid face '{l}'")))?;
            if let Some(&bad) = idx.iter().find(|&&i| i as usize >= nv) {
                return Err(fmt_err(ln, format!("face references vertex {bad} of {nv}")));
            }
            fan(&idx, &mut triangles);
        }
        TriMesh::new(vertices, triangles, file)
    }
}

/// Loads an ASCII OFF or PLY mesh, chosen by extension (falling back to the
/// file's magic line).
pub fn load_mesh(path: &Path) -> Result<TriMesh, DataError> {
    let text = read_text(path)?;
    let file = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("off") => TriMesh::parse_off(&text, &file),
        Some("ply") => TriMesh::parse_ply(&text, &file),
        _ if text.trim_start().starts_with("ply") => TriMesh::parse_ply(&text, &file),
        _ => TriMesh::parse_off(&text, &file),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_floats(line: &str, n: usize) -> Option<Vec<f64>> {
    let v: Vec<f64> = line
        .split_whitespace()
        .take(n)
        .map(|t| t.parse().ok())
        .collect::<Option<_>>()?;
    (v.len() == n).then_some(v)
}

fn parse_polygon(line: &str) -> Option<Vec<u32>> {
    let mut tok = line.split_whitespace();
    let k: usize = tok.next()?.parse().ok()?;
    let idx: Vec<u32> = tok.take(k).map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (idx.len() == k && k >= 3).then_some(idx)
}

fn fan(idx: &[u32], out: &mut Vec<[u32; 3]>) {
    for i in 1..idx.len() - 1 {
        out.push([idx[0], idx[i], idx[i + 1]]);
    }
}

fn spans_volume(vertices: &[Vector3<f64>]) -> bool {
    if vertices.len() < 4 {
        return false;
    }
    let c: Vector3<f64> = vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
    let cov: Matrix3<f64> = vertices.iter().map(|v| (v - c) * (v - c).transpose()).sum();
    let eig = cov.symmetric_eigenvalues();
    let max = eig.amax();
    max > 0.0 && eig.min() > max * 1e-16
}

fn used_vertices(triangles: &[[u32; 3]], n: usize) -> Vec<usize> {
    let mut used = vec![false; n];
    for t in triangles {
        for &i in t {
            used[i as usize] = true;
        }
    }
    (0..n).filter(|&i| used[i]).collect()
}

/// Every undirected edge shared by exactly two triangles traversing it in
/// opposite directions.
fn is_closed_manifold(triangles: &[[u32; 3]]) -> bool {
    let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    directed
        .iter()
        .all(|(&(a, b), &count)| count == 1 && directed.get(&(b, a)) == Some(&1))
}

/// Signed volume and volume centroid by summing origin-apex tetrahedra.
fn signed_volume(vertices: &[Vector3<f64>], triangles: &[[u32; 3]]) -> (f64, Vector3<f64>) {
    // shift to a local origin for accuracy
    let origin = vertices[triangles[0][0] as usize];
    let mut volume = 0.0;
    let mut moment = Vector3::zeros();
    for t in triangles {
        let [a, b, c] = t.map(|i| vertices[i as usize] - origin);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += v * (a + b + c) / 4.0;
    }
    let centroid = if volume.abs() > 0.0 { moment / volume + origin } else { origin };
    (volume, centroid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub const UNIT_CUBE_OFF: &str = "OFF
8 12 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
3 0 2 1
3 0 3 2
3 4 5 6
3 4 6 7
3 0 1 5
3 0 5 4
3 1 2 6
3 1 6 5
3 2 3 7
3 2 7 6
3 3 0 4
3 3 4 7
";

    #[test]
    fn unit_cube_mass_properties() {
        let m = TriMesh::parse_off(UNIT_CUBE_OFF, "cube.off").unwrap();
        assert!(m.watertight);
        assert!(!m.centroid_fallback);
        assert_abs_diff_eq!(m.center_of_mass, Vector3::new(0.5, 0.5, 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(m.max_radius, 3f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.volume(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.surface_area(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn inward_winding_is_flipped() {
        let flipped: String = UNIT_CUBE_OFF
            .lines()
            .map(|l| {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() == 4 && t[0] == "3" {
                    format!("3 {} {} {}\n", t[1], t[3], t[2])
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        let m = TriMesh::parse_off(&flipped, "cube.off").unwrap();
        assert_abs_diff_eq!(m.volume(), 1.0, epsilon = 1e-12);
        // +z face normal points up after re-orientation
        let top = (0..m.triangles.len())
            .find(|&i| m.triangle(i).iter().all(|v| v.z == 1.0))
            .unwrap();
        assert_abs_diff_eq!(m.triangle_normal(top), Vector3::z(), epsilon = 1e-12);
    }

    #[test]
    fn tetrahedron_is_valid() {
        let off = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        let m = TriMesh::parse_off(off, "tet.off").unwrap();
        assert_eq!(m.triangles.len(), 4);
        assert!(m.watertight);
        assert_abs_diff_eq!(m.center_of_mass, Vector3::new(0.25, 0.25, 0.25), epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_index_is_format_error() {
        let bad = UNIT_CUBE_OFF.replace("3 3 4 7", "3 3 4 99");
        let e = TriMesh::parse_off(&bad, "cube.off").unwrap_err();
        assert!(matches!(e, DataError::Format { line: 22, .. }), "{e}");
    }

    #[test]
    fn flat_mesh_is_degenerate() {
        let off = "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";
        assert!(matches!(TriMesh::parse_off(off, "f.off"), Err(DataError::DegenerateMesh { .. })));
    }

    #[test]
    fn open_mesh_falls_back_to_centroid() {
        // cube without its top face
        let open: String = UNIT_CUBE_OFF
            .replace("8 12 0", "8 10 0")
            .replace("3 4 5 6\n3 4 6 7\n", "");
        let m = TriMesh::parse_off(&open, "open.off").unwrap();
        assert!(!m.watertight);
        assert!(m.centroid_fallback);
        assert_abs_diff_eq!(m.center_of_mass, Vector3::new(0.5, 0.5, 0.5), epsilon = 1e-12);
    }

    #[test]
    fn ply_matches_off() {
        let ply = "ply
format ascii 1.0
comment unit cube
element vertex 8
property float x
property float y
property float z
element face 6
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
";
        let a = TriMesh::parse_ply(ply, "cube.ply").unwrap();
        let b = TriMesh::parse_off(UNIT_CUBE_OFF, "cube.off").unwrap();
        assert_eq!(a.triangles.len(), 12);
        assert_abs_diff_eq!(a.center_of_mass, b.center_of_mass, epsilon = 1e-12);
        assert_abs_diff_eq!(a.max_radius, b.max_radius, epsilon = 1e-12);
    }

    #[test]
    fn off_round_trip() {
        let m = TriMesh::parse_off(UNIT_CUBE_OFF, "cube.off").unwrap();
        assert_eq!(TriMesh::parse_off(&m.to_off(), "again.off").unwrap(), m);
    }

    #[test]
    fn cuboid_is_closed_and_centered() {
        let c = TriMesh::cuboid(Vector3::new(0.06, 0.06, 0.06), Vector3::new(0.0, 0.0, 0.03));
        assert!(c.watertight);
        assert_abs_diff_eq!(c.center_of_mass, Vector3::new(0.0, 0.0, 0.03), epsilon = 1e-12);
        assert_abs_diff_eq!(c.volume(), 0.06f64.powi(3), epsilon = 1e-15);
    }
}
