//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::{SVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit<const D: usize>(rng: &mut impl Rng) -> SVector<f64, D> {
    loop {
        let v = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn support<const D: usize>(points: &[SVector<f64, D>], u: &SVector<f64, D>) -> f64 {
    points.iter().map(|p| p.dot(u)).fold(f64::NEG_INFINITY, f64::max)
}

/// Smoothed support function `τ·log Σ exp(p·u/τ)` and its gradient.
fn soft_support<const D: usize>(points: &[SVector<f64, D>], u: &SVector<f64, D>, tau: f64) -> (f64, SVector<f64, D>) {
    let h = support(points, u);
    let mut z = 0.0;
    let mut g = SVector::<f64, D>::zeros();
    for p in points {
        let w = ((p.dot(u) - h) / tau).exp();
        z += w;
        g += w * p;
    }
    (h + tau * z.ln(), g / z)
}

/// Local minimum of the support function on the unit sphere near `u`:
/// projected gradient descent on a log-sum-exp smoothing whose temperature
/// is annealed toward 0.
fn refine<const D: usize>(points: &[SVector<f64, D>], mut u: SVector<f64, D>, scale: f64) -> SVector<f64, D> {
    let mut tau = 0.05 * scale;
    while tau > 1e-10 * scale {
        let mut step = 0.1;
        for _ in 0..150 {
            let (f, g) = soft_support(points, &u, tau);
            let rg = g - g.dot(&u) * u;
            if rg.norm() < 1e-14 * scale {
                break;
            }
            loop {
                let cand = (u - step * rg / rg.norm()).normalize();
                if soft_support(points, &cand, tau).0 < f {
                    u = cand;
                    step *= 1.3;
                    break;
                }
                step *= 0.5;
                if step < 1e-15 {
                    break;
                }
            }
            if step < 1e-15 {
                break;
            }
        }
        tau *= 0.3;
    }
    u
}

const ACTIVE: usize = 10;

fn combinations(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..n {
        current.push(i);
        combinations(n, k, i + 1, current, out);
        current.pop();
    }
}

/// Smallest support value over the hyperplanes through `D` of the points
/// most active along `u` that support the whole set. Each candidate is the
/// support function at the plane normal, so the result stays an upper bound.
fn active_planes<const D: usize>(points: &[SVector<f64, D>], u: &SVector<f64, D>, scale: f64) -> f64 {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].dot(u).total_cmp(&points[a].dot(u)));
    order.truncate(ACTIVE.max(D));
    let mut subsets = Vec::new();
    combinations(order.len(), D, 0, &mut Vec::new(), &mut subsets);
    let mut best = f64::INFINITY;
    for s in subsets {
        let m = nalgebra::SMatrix::<f64, D, D>::from_fn(|r, c| points[order[s[r]]][c]);
        let Some(n) = m.try_inverse().map(|inv| inv * SVector::<f64, D>::repeat(1.0)) else {
            continue;
        };
        let normal = n.normalize();
        let offset = 1.0 / n.norm();
        if support(points, &normal) <= offset + 1e-12 * scale {
            best = best.min(support(points, &normal));
        }
    }
    best
}

const STARTS: usize = 48;

/// Inscribed-ball radius estimated as the minimum of the support function
/// over unit directions: random sampling, then local refinement from the
/// best samples. The estimate is an upper bound of the true value.
pub fn support_oracle<const D: usize>(points: &[SVector<f64, D>], directions: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut best: Vec<(f64, SVector<f64, D>)> = Vec::new();
    for _ in 0..directions {
        let u = random_unit::<D>(&mut rng);
        let h = support(points, &u);
        if best.len() < STARTS || h < best[best.len() - 1].0 {
            best.push((h, u));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(STARTS);
        }
    }
    let mut result = best.first().map_or(0.0, |b| b.0);
    for (_, u) in best {
        let u = refine(points, u, scale);
        result = result.min(support(points, &u)).min(active_planes(points, &u, scale));
    }
    result.max(0.0)
}

pub fn to6(v: &SVector<f64, 6>) -> nalgebra::Vector6<f64> {
    *v
}

pub fn v3(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

/// Bundled benchmark data.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Two opposing box fingers hinged 6 cm either side of the palm. Closing
/// swings them inward about ±y.
pub const TWO_FINGER_HAND: &str = r#"<hand name="two_finger" aperture="0.12" payload="1">
  <link name="palm"><box><size>0.02 0.02 0.01</size><center>0 0 0.005</center></box></link>
  <link name="left"><box><size>0.01 0.01 0.06</size><center>0 0 -0.03</center></box></link>
  <link name="right"><box><size>0.01 0.01 0.06</size><center>0 0 -0.03</center></box></link>
  <joint name="l" type="revolute" parent="palm" child="left">
    <origin>1 0 0 -0.06  0 1 0 0  0 0 1 0  0 0 0 1</origin>
    <axis>0 -1 0</axis><limits lo="0" hi="1.2"/>
  </joint>
  <joint name="r" type="revolute" parent="palm" child="right">
    <origin>1 0 0 0.06  0 1 0 0  0 0 1 0  0 0 0 1</origin>
    <axis>0 1 0</axis><limits lo="0" hi="1.2"/>
  </joint>
</hand>"#;

/// A thumb on -x against two fingers on +x, offset along y.
pub const THREE_FINGER_HAND: &str = r#"<hand name="three_finger" aperture="0.12" payload="1">
  <link name="palm"><box><size>0.02 0.02 0.01</size><center>0 0 0.005</center></box></link>
  <link name="thumb"><box><size>0.01 0.01 0.06</size><center>0 0 -0.03</center></box></link>
  <link name="index"><box><size>0.01 0.01 0.06</size><center>0 0 -0.03</center></box></link>
  <link name="middle"><box><size>0.01 0.01 0.06</size><center>0 0 -0.03</center></box></link>
  <joint name="thumb" type="revolute" parent="palm" child="thumb">
    <origin>1 0 0 -0.06  0 1 0 0  0 0 1 0  0 0 0 1</origin>
    <axis>0 -1 0</axis><limits lo="0" hi="1.2"/>
  </joint>
  <joint name="index" type="revolute" parent="palm" child="index">
    <origin>1 0 0 0.06  0 1 0 0.02  0 0 1 0  0 0 0 1</origin>
    <axis>0 1 0</axis><limits lo="0" hi="1.2"/>
  </joint>
  <joint name="middle" type="revolute" parent="palm" child="middle">
    <origin>1 0 0 0.06  0 1 0 -0.02  0 0 1 0  0 0 0 1</origin>
    <axis>0 1 0</axis><limits lo="0" hi="1.2"/>
  </joint>
</hand>"#;

/// Center of the fixture cube on the board; the cube rests on the board.
pub const CUBE_AT: (f64, f64) = (0.3, 0.2);
pub const CUBE_SIDE: f64 = 0.06;

/// Small dataset in `dir`: one 6 cm cube in layout 0, the given hand and five
/// identical top grasps 3 cm above the cube.
pub fn write_cube_dataset(dir: &std::path::Path, hand_xml: &str) {
    use graspa_core::data::TriMesh;
    let hand_name = roxmltree::Document::parse(hand_xml)
        .unwrap()
        .root_element()
        .attribute("name")
        .unwrap()
        .to_string();
    for sub in ["layouts", "meshes", "logs"] {
        std::fs::create_dir_all(dir.join(sub)).unwrap();
    }
    let cube = TriMesh::cuboid(Vector3::new(CUBE_SIDE, CUBE_SIDE, CUBE_SIDE), Vector3::new(0.0, 0.0, CUBE_SIDE / 2.0));
    std::fs::write(dir.join("meshes/cube.off"), cube.to_off()).unwrap();
    std::fs::write(dir.join("hand.xml"), hand_xml).unwrap();
    let (x, y) = CUBE_AT;
    std::fs::write(
        dir.join("layouts/layout_0.xml"),
        format!(
            r#"<layout id="0">
  <object name="cube">
    <mesh>../meshes/cube.off</mesh>
    <pose>1 0 0 {x}  0 1 0 {y}  0 0 1 0  0 0 0 1</pose>
    <mass>0.1</mass>
    <min_grip>0.06</min_grip>
  </object>
</layout>
"#
        ),
    )
    .unwrap();
    let trial = format!(
        r#"    <trial hand="{hand_name}"><pose>1 0 0 {x}  0 1 0 {y}  0 0 1 0.09  0 0 0 1</pose></trial>
"#
    );
    std::fs::write(
        dir.join("logs/grasps_0.xml"),
        format!("<grasp_set layout=\"0\">\n  <object name=\"cube\">\n{}  </object>\n</grasp_set>\n", trial.repeat(5)),
    )
    .unwrap();
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = graspa_core::cli::run(std::iter::once("graspa").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Mean S3 values printed by `score-quality`, in output order.
pub fn printed_mean_s3(text: &str) -> Vec<f64> {
    text.lines()
        .filter_map(|l| l.split_once("mean S3 "))
        .map(|(_, rest)| rest.split(|c: char| c == ',' || c.is_whitespace()).next().unwrap().parse().unwrap())
        .collect()
}
