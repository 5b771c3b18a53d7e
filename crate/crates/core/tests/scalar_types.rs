use std::sync::Arc;

use lcdt::quadrature::build_rule;
use lcdt::symfun::SymExpr;
use lcdt::transform::{lcdt_forward, lcdt_inverse, sample_expr};
use lcdt::{Matrix, Matrix32, Param, Param32};

#[test]
fn single_precision_round_trip_tracks_double() {
    let k32 = Param32::new(0.0).unwrap();
    let m32 = Matrix32::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let xr = Arc::new(build_rule(k32, 12.0f32, 48, 16).unwrap());
    let lr = Arc::new(build_rule(k32, 16.0f32, 64, 16).unwrap());
    let f = sample_expr(&SymExpr::<f32>::gaussian(0.5), xr.clone()).unwrap();
    let g = lcdt_forward(&f, &m32, lr).unwrap();
    let back = lcdt_inverse(&g, xr).unwrap();
    assert!(back.sup_distance(&f).unwrap() < 1e-4);

    let k = Param::new(0.0).unwrap();
    let m = Matrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let xr = Arc::new(build_rule(k, 12.0, 48, 16).unwrap());
    let lr = Arc::new(build_rule(k, 16.0, 64, 16).unwrap());
    let g64 = lcdt_forward(&sample_expr(&SymExpr::gaussian(0.5), xr).unwrap(), &m, lr).unwrap();
    let gap = g
        .values()
        .iter()
        .zip(g64.values())
        .map(|(a, b)| ((a.re as f64 - b.re).powi(2) + (a.im as f64 - b.im).powi(2)).sqrt())
        .fold(0.0, f64::max);
    assert!(gap < 1e-4, "{gap}");
}
