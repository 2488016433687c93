use super::{IoError, ResultBundle, Result};
use crate::region::SweepPoint;
use super::table::format_float;

/// Written for grid cells that no traced point falls into.
pub const CONTOUR_SENTINEL: &str = "NA";

const MIN_POINTS: usize = 3;

/// Distortion over a regular `(R_1, R_2)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub r1_centers: Vec<f64>,
    pub r2_centers: Vec<f64>,
    /// `values[j][i]` is the cell at `r2_centers[j]`, `r1_centers[i]`.
    pub values: Vec<Vec<Option<f64>>>,
}

impl ContourGrid {
    /// Header row of `R_1` centers, then one row per `R_2` center.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["R_2\\R_1".to_string()];
        header.extend(self.r1_centers.iter().map(|&c| format_float(c)));
        w.write_record(&header)?;
        for (j, row) in self.values.iter().enumerate() {
            let mut rec = vec![format_float(self.r2_centers[j])];
            rec.extend(row.iter().map(|v| match v {
                Some(d) => format_float(*d),
                None => CONTOUR_SENTINEL.to_string(),
            }));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }
}

fn usable(p: &SweepPoint) -> bool {
    p.error.is_none() && p.distortion.is_finite() && p.rates.iter().all(|r| r.is_finite())
}

/// Bins the point cloud on `[0, max R_i]` per axis with `bins` cells each.
/// Each cell takes the distortion of the point nearest its center among the
/// points inside it; empty cells stay `None`.
pub fn build_contour_grid(points: &[SweepPoint], bins: usize) -> Result<ContourGrid> {
    let m = points.iter().map(|p| p.rates.len()).max().unwrap_or(0);
    if m != 2 {
        return Err(IoError::WrongSourceCount(m));
    }
    let cloud: Vec<&SweepPoint> = points.iter().filter(|p| usable(p)).collect();
    if cloud.len() < MIN_POINTS || bins == 0 {
        return Err(IoError::NotEnoughPoints {
            needed: MIN_POINTS,
            got: cloud.len(),
        });
    }
    let width = |axis: usize| {
        let hi = cloud.iter().map(|p| p.rates[axis].max(0.0)).fold(0.0, f64::max);
        if hi > 0.0 { hi / bins as f64 } else { 1.0 }
    };
    let (w1, w2) = (width(0), width(1));
    let center = |k: usize, w: f64| (k as f64 + 0.5) * w;
    let cell = |r: f64, w: f64| ((r.max(0.0) / w) as usize).min(bins - 1);

    let mut best: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; bins]; bins];
    for p in cloud {
        let (i, j) = (cell(p.rates[0], w1), cell(p.rates[1], w2));
        let dist = ((p.rates[0] - center(i, w1)) / w1).hypot((p.rates[1] - center(j, w2)) / w2);
        let slot = &mut best[j][i];
        if slot.is_none_or(|(d, _)| dist < d) {
            *slot = Some((dist, p.distortion));
        }
    }
    Ok(ContourGrid {
        r1_centers: (0..bins).map(|k| center(k, w1)).collect(),
        r2_centers: (0..bins).map(|k| center(k, w2)).collect(),
        values: best
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.map(|(_, d)| d)).collect())
            .collect(),
    })
}

/// Contour CSV of every point in `bundle`.
pub fn emit_contour_grid(bundle: &ResultBundle, bins: usize) -> Result<String> {
    build_contour_grid(&bundle.points, bins)?.to_csv()
}
