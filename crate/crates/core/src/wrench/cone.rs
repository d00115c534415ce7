use nalgebra::{Vector3, Vector6};

use super::ContactPoint;

pub type Wrench = Vector6<f64>;

/// Deterministic orthonormal pair spanning the plane orthogonal to `n`.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Unit edge forces of the linearized friction cone around `-normal`.
pub fn cone_edges(normal: &Vector3<f64>, mu: f64, m: usize) -> Vec<Vector3<f64>> {
    let (t1, t2) = tangent_basis(normal);
    (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            (-normal + mu * (theta.cos() * t1 + theta.sin() * t2)).normalize()
        })
        .collect()
}

pub fn wrench(force: &Vector3<f64>, position: &Vector3<f64>, com: &Vector3<f64>, lambda: f64) -> Wrench {
    let torque = lambda * (position - com).cross(force);
    Wrench::new(force.x, force.y, force.z, torque.x, torque.y, torque.z)
}

/// `m` cone-edge wrenches per contact; torques are scaled by `lambda`.
pub fn contact_wrenches(contacts: &[ContactPoint], mu: f64, m: usize, lambda: f64, com: &Vector3<f64>) -> Vec<Wrench> {
    contacts
        .iter()
        .flat_map(|c| {
            cone_edges(&c.normal, mu, m)
                .into_iter()
                .map(move |f| wrench(&f, &c.position, com, lambda))
        })
        .collect()
}
