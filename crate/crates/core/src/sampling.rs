//! Reproducible random elements and densities.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
pub use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::clifford::{CliffordContext, Element};
use crate::density::Density;
use crate::spectral::SpectralDecomp;

/// Generator for sample `sample_id` of a run seeded with `seed`. Each sample
/// gets its own stream, so results do not depend on evaluation order.
pub fn sample_rng(seed: u64, sample_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample_id.to_le_bytes());
    key[16..24].copy_from_slice(b"fermiot1");
    ChaCha8Rng::from_seed(key)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Element with independent standard complex Gaussian coefficients.
pub fn random_element<R: Rng + ?Sized>(ctx: &Arc<CliffordContext>, rng: &mut R) -> Element {
    let c: Vec<Complex64> = (0..ctx.dim())
        .map(|_| Complex64::new(normal(rng), normal(rng)))
        .collect();
    Element::from_coeffs(ctx, &c).expect("length matches")
}

pub fn random_self_adjoint<R: Rng + ?Sized>(ctx: &Arc<CliffordContext>, rng: &mut R) -> Element {
    random_element(ctx, rng).hermitian_part()
}

/// Self-adjoint element with `tau = 0`.
pub fn random_traceless_self_adjoint<R: Rng + ?Sized>(ctx: &Arc<CliffordContext>, rng: &mut R) -> Element {
    let a = random_self_adjoint(ctx, rng);
    let t = a.trace();
    &a - &Element::identity(ctx).scale(t)
}

/// Random density `(1 - floor) sum_j (w_j / tau(P_j)) P_j + floor I`.
///
/// `P_j` are the spectral projectors of a random self-adjoint element, so the
/// eigenbasis is random within the algebra; `w` is uniform on the simplex.
/// The floor bounds the spectrum below.
pub fn random_density<R: Rng + ?Sized>(ctx: &Arc<CliffordContext>, rng: &mut R, floor: f64) -> Density {
    let h = random_self_adjoint(ctx, rng);
    let spec = SpectralDecomp::new(&h).expect("hermitian part is self-adjoint");
    let distinct = spec.distinct();
    let w: Vec<f64> = distinct.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let d = ctx.dim() as f64;
    let mut vals = Vec::with_capacity(ctx.dim());
    for ((_, mult), wj) in distinct.iter().zip(&w) {
        // tau(P_j) = mult / dim
        let v = (wj / total) * d / *mult as f64;
        vals.extend(std::iter::repeat_n(v, *mult));
    }
    let rho = spec.apply_values(&vals).hermitian_part();
    let rho = Density::normalized(&rho).expect("positive trace");
    if floor > 0.0 {
        rho.mix_with_identity(floor)
    } else {
        rho
    }
}

/// Uniform point in the open unit ball of `R^3` scaled by `radius`.
pub fn random_ball_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> [f64; 3] {
    loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2 = p.iter().map(|x| x * x).sum::<f64>();
        if r2 < 1.0 && r2 > 0.0 {
            return p.map(|x| x * radius);
        }
    }
}
