// dev scratch: compute frozen fixture values (removed before release)
use polariton_lab::grid::Grid1D;
use polariton_lab::model::{build_length_gauge, GaugeForm, MatterModel, ModeSet};
use polariton_lab::solver::dense::dense_solve;

fn main() {
    let matter =
        MatterModel::single_electron_harmonic(Grid1D::new(-8.0, 8.0, 201).unwrap(), 1.0);
    let modes = ModeSet::single(1.0, 0.05, 8);
    let h = build_length_gauge(&matter, &modes, &GaugeForm::default(), None).unwrap();
    let spec = dense_solve(&h).unwrap();
    println!("dim = {}", h.dim());
    println!("E0 = {:.16}", spec.eigenvalues[0]);
    println!("E1 = {:.16}", spec.eigenvalues[1]);
    println!("E2 = {:.16}", spec.eigenvalues[2]);
    println!("max residual (first 5): {:.3e}", spec.residuals[..5].iter().fold(0.0f64, |a, &b| a.max(b)));
}
