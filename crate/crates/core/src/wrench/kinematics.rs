use std::collections::BTreeMap;

use crate::data::HandModel;
use crate::se3::{axis_angle, Pose};

use super::WrenchError;

/// Joint values indexed like `hand.joints`, clamped into the limits. Joints
/// missing from `joints` start at 0 (clamped).
pub fn joint_vector(hand: &HandModel, joints: &BTreeMap<String, f64>) -> Result<Vec<f64>, WrenchError> {
    if let Some(unknown) = joints.keys().find(|n| hand.joint(n).is_none()) {
        return Err(WrenchError::UnknownJoint(unknown.clone()));
    }
    Ok(hand
        .joints
        .iter()
        .map(|j| {
            let q = joints.get(&j.name).copied().unwrap_or(0.0);
            let c = j.clamp(q);
            if c != q && joints.contains_key(&j.name) {
                log::warn!("joint '{}' value {q} outside [{}, {}], clamped", j.name, j.lo, j.hi);
            }
            c
        })
        .collect())
}

/// Link poses (indexed like `hand.links`) for joint values indexed like
/// `hand.joints`. The base link frame is `base_pose · hand.base_frame`.
pub(crate) fn link_poses(hand: &HandModel, base_pose: &Pose, q: &[f64]) -> Vec<Pose> {
    let root = base_pose.compose(&hand.base_frame);
    let mut poses = vec![root; hand.links.len()];
    for &ji in hand.joint_order() {
        let j = &hand.joints[ji];
        let parent = hand.link_index(&j.parent).expect("validated");
        let child = hand.link_index(&j.child).expect("validated");
        let motion = Pose::from_rotation(axis_angle(&j.axis, q[ji]));
        poses[child] = poses[parent].compose(&j.origin).compose(&motion);
    }
    poses
}

/// Pose of every link in the board frame. Values outside the limits are
/// clamped with a warning.
pub fn forward_kinematics(
    hand: &HandModel,
    base_pose: &Pose,
    joints: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, Pose>, WrenchError> {
    let q = joint_vector(hand, joints)?;
    Ok(hand
        .links
        .iter()
        .zip(link_poses(hand, base_pose, &q))
        .map(|(l, p)| (l.name.clone(), p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use std::f64::consts::FRAC_PI_2;

    const ONE_JOINT: &str = r#"<hand name="h" aperture="0.1" payload="1">
      <link name="base"/><link name="arm"/>
      <joint name="j" type="revolute" parent="base" child="arm">
        <origin>1 0 0 0.05  0 1 0 0  0 0 1 0.01  0 0 0 1</origin>
        <axis>0 0 1</axis><limits lo="-2" hi="2"/>
      </joint>
    </hand>"#;

    #[test]
    fn zero_joints_give_origin_offsets() {
        let h = HandModel::parse_str(ONE_JOINT, "mem").unwrap();
        let fk = forward_kinematics(&h, &Pose::identity(), &BTreeMap::new()).unwrap();
        assert_abs_diff_eq!(fk["arm"].position, Vector3::new(0.05, 0.0, 0.01), epsilon = 1e-15);
        assert_eq!(fk["base"], Pose::identity());
    }

    #[test]
    fn quarter_turn_moves_child_offset() {
        let h = HandModel::parse_str(ONE_JOINT, "mem").unwrap();
        let fk = forward_kinematics(&h, &Pose::identity(), &BTreeMap::from([("j".to_string(), FRAC_PI_2)])).unwrap();
        // point (0.1, 0, 0) of the child, seen from the joint frame
        let joint_frame = Pose::from_translation(Vector3::new(0.05, 0.0, 0.01));
        let p = joint_frame.inverse().transform_point(&fk["arm"].transform_point(&Vector3::new(0.1, 0.0, 0.0)));
        assert_abs_diff_eq!(p, Vector3::new(0.0, 0.1, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn unknown_joint_and_clamping() {
        let h = HandModel::parse_str(ONE_JOINT, "mem").unwrap();
        let bad = BTreeMap::from([("nope".to_string(), 0.0)]);
        assert!(matches!(forward_kinematics(&h, &Pose::identity(), &bad), Err(WrenchError::UnknownJoint(_))));
        let far = BTreeMap::from([("j".to_string(), 5.0)]);
        assert_eq!(joint_vector(&h, &far).unwrap(), [2.0]);
    }
}
