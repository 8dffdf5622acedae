use super::Fdmh;

/// Bhattacharyya coefficient of two histograms after normalizing each to
/// unit mass. Zero when either side carries no mass.
pub fn bhattacharyya(a: &Fdmh, b: &Fdmh) -> f64 {
    bhattacharyya_slices(&a.0, &b.0)
}

pub fn bhattacharyya_slices(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "bhattacharyya over different bin counts");
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    if sa <= 0.0 || sb <= 0.0 {
        return 0.0;
    }
    let coeff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| ((x / sa) * (y / sb)).sqrt())
        .sum();
    coeff.clamp(0.0, 1.0)
}
