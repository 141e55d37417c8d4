use rand::seq::index::sample;

use super::{EstimatorConfig, InitMode};
use crate::constraints::{floor_eigenvalues, project_eigenvalues, ConstraintSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mixture::ModelParams;
use crate::rng::seeded_rng;

const MAD_SCALE: f64 = 1.482_602_218_505_602;

/// Starting parameters for one start, deterministic in `seed`.
pub fn initial_params(data: &Dataset, config: &EstimatorConfig, seed: u64) -> Result<ModelParams> {
    build(data, config.k, config.init_mode, &config.constraints, seed)
}

pub(crate) fn build(data: &Dataset, k: usize, mode: InitMode, spec: &ConstraintSpec, seed: u64) -> Result<ModelParams> {
    let n = data.n();
    if n < k {
        return Err(Error::TooFewRows { n, k });
    }
    let mut rng = seeded_rng(seed);
    let seeds: Vec<usize> = sample(&mut rng, n, k).into_iter().collect();
    let pooled = pooled_diagonal(data, spec);

    let (means, covs) = match mode {
        InitMode::RandomRows => {
            let means = seeds.iter().map(|&i| data.row(i).to_vec()).collect();
            (means, vec![pooled; k])
        }
        InitMode::MedianMad => median_mad_cells(data, &seeds, &pooled, spec)?,
    };
    let covs = project_eigenvalues(&covs, spec)?;
    ModelParams::new(vec![1.0 / k as f64; k], means, covs)
}

fn pooled_diagonal(data: &Dataset, spec: &ConstraintSpec) -> SymMatrix {
    let p = data.p();
    let cov = data.covariance();
    let diag: Vec<f64> = (0..p).map(|i| cov[i * p + i].max(spec.c1)).collect();
    SymMatrix::diagonal(&diag)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

fn median_mad_cells(
    data: &Dataset,
    seeds: &[usize],
    pooled: &SymMatrix,
    spec: &ConstraintSpec,
) -> Result<(Vec<Vec<f64>>, Vec<SymMatrix>)> {
    let p = data.p();
    let centers: Vec<&[f64]> = seeds.iter().map(|&i| data.row(i)).collect();
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); seeds.len()];
    for (i, x) in data.rows().enumerate() {
        let nearest = centers
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(j, _)| j)
            .expect("k >= 1");
        cells[nearest].push(i);
    }
    let mut means = Vec::with_capacity(seeds.len());
    let mut covs = Vec::with_capacity(seeds.len());
    for (cell, center) in cells.iter().zip(&centers) {
        if cell.len() < 2 {
            means.push(center.to_vec());
            covs.push(pooled.clone());
            continue;
        }
        let mut mu = Vec::with_capacity(p);
        let mut var = Vec::with_capacity(p);
        for d in 0..p {
            let mut col: Vec<f64> = cell.iter().map(|&i| data.row(i)[d]).collect();
            let med = median(&mut col);
            let mut dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
            let mad = MAD_SCALE * median(&mut dev);
            mu.push(med);
            var.push(if mad > 0.0 { mad * mad } else { pooled.get(d, d) });
        }
        means.push(mu);
        covs.push(floor_eigenvalues(&SymMatrix::diagonal(&var), spec.c1)?);
    }
    Ok((means, covs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_rows_uses_distinct_rows() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64]).collect();
        let data = Dataset::from_rows(&rows, "t").unwrap();
        let spec = ConstraintSpec::new(50.0, 1e-6).unwrap();
        let theta = build(&data, 3, InitMode::RandomRows, &spec, 7).unwrap();
        let mut m: Vec<f64> = theta.means.iter().map(|v| v[0]).collect();
        m.dedup();
        assert_eq!(m.len(), 3);
        assert_eq!(theta, build(&data, 3, InitMode::RandomRows, &spec, 7).unwrap());
    }

    #[test]
    fn median_mad_is_robust_to_a_far_row() {
        let mut rows: Vec<[f64; 1]> = (0..21).map(|i| [i as f64 / 10.0]).collect();
        rows.push([1e6]);
        let data = Dataset::from_rows(&rows, "t").unwrap();
        let spec = ConstraintSpec::new(1e20, 1e-9).unwrap();
        let theta = build(&data, 1, InitMode::MedianMad, &spec, 3).unwrap();
        assert!((theta.means[0][0] - 1.05).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let data = Dataset::from_rows(&[[1.0], [2.0], [3.0]], "t").unwrap();
        let spec = ConstraintSpec::new(50.0, 1e-6).unwrap();
        assert_eq!(build(&data, 4, InitMode::RandomRows, &spec, 0).unwrap_err(), Error::TooFewRows { n: 3, k: 4 });
    }
}
