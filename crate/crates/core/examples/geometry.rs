//! Poincaré-ball arithmetic: Möbius addition, distances, maps at the origin
//! and geodesic interpolation.

use defrel::geometry::{self as geo, Curvature};

fn main() -> defrel::Result<()> {
    let c = Curvature::default();
    let x = [0.5, 0.0];
    let y = [0.0, 0.6];

    println!("x ⊕ y          = {:?}", geo::mobius_add(&x, &y, c)?);
    println!("y ⊕ x          = {:?}  (not commutative)", geo::mobius_add(&y, &x, c)?);
    println!("d(x, y)        = {:.6}", geo::poincare_distance(&x, &y, c)?);
    println!("d(0, x)        = {:.6}  = 2 atanh(0.5)", geo::poincare_distance(&[0.0, 0.0], &x, c)?);

    let v = geo::log0(&x, c);
    println!("log0(x)        = {v:?}");
    println!("exp0(log0(x))  = {:?}", geo::exp0(&v, c));
    println!("diag(2,2) ⊗ x  = {:?}", geo::mobius_matvec(&[2.0, 2.0], &x, c)?);

    // Points near the boundary are pulled back inside the ball.
    let far = geo::exp0(&[40.0, 0.0], c);
    println!("exp0(40 e1)    = {:?}  (norm {:.6})", far, geo::norm(&far));

    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = geo::geodesic_point(&x, &y, t, c)?;
        println!("geodesic t={t:<4} {:?}", p);
    }

    let sharper = Curvature::new(4.0)?;
    println!("d(x, y) at c=4 = {:.6}", geo::poincare_distance(&[0.25, 0.0], &[0.0, 0.3], sharper)?);
    Ok(())
}
