//! Bit-wise soft demapping of `2^m`-ASK under BRGC labeling.

use crate::labeling::BrgcLabeling;

/// `ln Σ exp(x_i)` over a non-empty slice.
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Demapper for a fixed prior and noise variance.
#[derive(Debug, Clone)]
pub struct Demapper {
    lab: BrgcLabeling,
    log_prior: Vec<f64>,
    sigma2: f64,
}

impl Demapper {
    /// `p_x` is the prior over the `2^m` points, `sigma2` the noise variance.
    pub fn new(lab: BrgcLabeling, p_x: &[f64], sigma2: f64) -> Self {
        assert_eq!(p_x.len(), lab.num_points());
        Self {
            log_prior: p_x.iter().map(|p| p.ln()).collect(),
            lab,
            sigma2,
        }
    }

    pub fn labeling(&self) -> &BrgcLabeling {
        &self.lab
    }

    /// `L(B_j) = ln Σ_{x: b_j = 0} P(x) p(y|x) - ln Σ_{x: b_j = 1} P(x) p(y|x)`,
    /// for `j = 0` (sign) through `m - 1`.
    pub fn llrs(&self, y: f64, out: &mut [f64]) {
        let metric: Vec<f64> = (0..self.lab.num_points())
            .map(|i| self.log_prior[i] - (y - self.lab.point(i)).powi(2) / (2.0 * self.sigma2))
            .collect();
        for (j, o) in out.iter_mut().enumerate() {
            let side = |b: u8| {
                metric
                    .iter()
                    .enumerate()
                    .filter(move |&(i, _)| self.lab.bit(i, j as u32) == b)
                    .map(|(_, &mtr)| mtr)
            };
            *o = log_sum_exp(side(0)) - log_sum_exp(side(1));
        }
    }

    pub fn llr(&self, y: f64, j: u32) -> f64 {
        let mut out = vec![0.0; self.lab.m() as usize];
        self.llrs(y, &mut out);
        out[j as usize]
    }
}

/// One-shot [`Demapper::llr`].
pub fn llr(y: f64, sigma2: f64, p_x: &[f64], lab: &BrgcLabeling, j: u32) -> f64 {
    Demapper::new(*lab, p_x, sigma2).llr(y, j)
}
