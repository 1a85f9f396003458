//! The S² chart used for the gravity direction: tangent basis identities and
//! boxplus/boxminus round trips, including a point near the chart antipode.

use eqf_lio::eqf::{build_bg, s2_boxminus, s2_boxplus, GravityDir};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

fn main() -> eqf_lio::Result<()> {
    for v in [Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.3, -0.5, 0.8), Vector3::new(0.1, 0.0, -0.98)] {
        let g = GravityDir::unit(v);
        let b = build_bg(&g)?;
        let n = *g.dir();
        let isometry = (b.transpose() * b - Matrix2::identity()).amax();
        let projector = (b * b.transpose() - (Matrix3::identity() - n * n.transpose())).amax();
        let x = Vector2::new(0.4, -0.2);
        let back = s2_boxminus(&g, &s2_boxplus(&g, &x)?)?;
        println!(
            "dir {:>6.3?}: BᵀB − I {isometry:.1e}, BBᵀ − (I − nnᵀ) {projector:.1e}, round trip {:.1e}",
            n.as_slice(),
            (back - x).amax()
        );
    }
    match build_bg(&GravityDir::unit(Vector3::new(0.0, 0.0, -1.0))) {
        Err(e) => println!("at the antipode: {e}"),
        Ok(_) => println!("at the antipode: unexpectedly defined"),
    }
    Ok(())
}
