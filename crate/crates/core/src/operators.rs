//! Real-coded variation operators over the index relaxation of a design.

use rand::Rng;

use crate::space::{DesignPoint, SearchSpace};

fn spread_factor(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// Simulated binary crossover. One draw decides whether the pair crosses;
/// crossing pairs draw one `u` per gene.
pub fn sbx_crossover<R: Rng + ?Sized>(a: &[f64], b: &[f64], eta_c: f64, p_c: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), b.len(), "parents differ in length");
    if rng.gen::<f64>() >= p_c {
        return (a.to_vec(), b.to_vec());
    }
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let beta = spread_factor(rng.gen::<f64>(), eta_c);
        c1.push(0.5 * ((1.0 + beta) * x + (1.0 - beta) * y));
        c2.push(0.5 * ((1.0 - beta) * x + (1.0 + beta) * y));
    }
    (c1, c2)
}

/// Bounded polynomial mutation. With probability `p_m` the individual is
/// mutated; each gene then mutates with probability `per_gene_prob`. Genes
/// whose range is at most one unit (single-option domains) are left alone.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    x: &[f64],
    bounds: &[(f64, f64)],
    eta_m: f64,
    p_m: f64,
    per_gene_prob: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut y = x.to_vec();
    if rng.gen::<f64>() >= p_m {
        return y;
    }
    let pow = 1.0 / (eta_m + 1.0);
    for (v, &(lo, hi)) in y.iter_mut().zip(bounds) {
        let range = hi - lo;
        if range <= 1.0 || rng.gen::<f64>() >= per_gene_prob {
            continue;
        }
        let d1 = ((*v - lo) / range).clamp(0.0, 1.0);
        let d2 = ((hi - *v) / range).clamp(0.0, 1.0);
        let r: f64 = rng.gen();
        let dq = if r < 0.5 {
            let val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta_m + 1.0);
            val.powf(pow) - 1.0
        } else {
            let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta_m + 1.0);
            1.0 - val.powf(pow)
        };
        *v = (*v + dq * range).clamp(lo, hi);
    }
    y
}

/// One over the number of genes with more than one option.
pub fn default_gene_prob(space: &SearchSpace) -> f64 {
    1.0 / space.free_genes().max(1) as f64
}

pub fn crossover_points<R: Rng + ?Sized>(
    space: &SearchSpace,
    a: &DesignPoint,
    b: &DesignPoint,
    eta_c: f64,
    p_c: f64,
    rng: &mut R,
) -> (DesignPoint, DesignPoint) {
    let (c1, c2) = sbx_crossover(&SearchSpace::to_real(a), &SearchSpace::to_real(b), eta_c, p_c, rng);
    (space.from_real(&c1), space.from_real(&c2))
}

pub fn mutate_point<R: Rng + ?Sized>(
    space: &SearchSpace,
    x: &DesignPoint,
    eta_m: f64,
    p_m: f64,
    per_gene_prob: f64,
    rng: &mut R,
) -> DesignPoint {
    let y = polynomial_mutation(&SearchSpace::to_real(x), &space.real_bounds(), eta_m, p_m, per_gene_prob, rng);
    space.from_real(&y)
}
