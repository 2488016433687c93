use super::Result;
use crate::region::SweepPoint;

/// 17 significant digits, enough to round-trip any `f64`. Non-finite values
/// print as `NaN`, `inf` or `-inf`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// `lambda, R_1.., R_M, D, lagrangian, converged`, one row per point.
pub fn sweep_csv(points: &[SweepPoint], num_sources: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=num_sources).map(|i| format!("R_{i}")));
    header.extend(["D", "lagrangian", "converged"].map(String::from));
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![format_float(p.lambda)];
        row.extend((0..num_sources).map(|i| format_float(p.rates.get(i).copied().unwrap_or(f64::NAN))));
        row.push(format_float(p.distortion));
        row.push(format_float(p.lagrangian));
        row.push(p.converged.to_string());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}
