//! Adaptive Gauss–Kronrod (7/15) quadrature, tensorized across axes.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 4000;

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the panel with the
/// largest error estimate until the summed estimate meets `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (val, err) = kronrod(&mut f, a, b);
    let mut panels = vec![Panel { a, b, val, err }];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let total: f64 = panels.iter().map(|p| p.val).sum();
        if total_err <= tol.max(4.0 * f64::EPSILON * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] stalled at error estimate {total_err:e}"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // cannot split further; keep its estimate as is
            panels.push(Panel { err: 0.0, ..p });
            continue;
        }
        let (lv, le) = kronrod(&mut f, p.a, m);
        let (rv, re) = kronrod(&mut f, m, p.b);
        panels.push(Panel {
            a: p.a,
            b: m,
            val: lv,
            err: le,
        });
        panels.push(Panel {
            a: m,
            b: p.b,
            val: rv,
            err: re,
        });
    }
}

/// `∫ f` over the box `Π [lo_i, hi_i]`, nesting the 1-D rule per axis.
pub fn integrate_box(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], tol: f64) -> Result<f64> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::arg(
            "integration box needs matching, non-empty bounds",
        ));
    }
    let mut x = vec![0.0; lo.len()];
    nest(f, lo, hi, tol, 0, &mut x)
}

fn nest(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    axis: usize,
    x: &mut [f64],
) -> Result<f64> {
    let last = axis + 1 == lo.len();
    let inner_tol = tol / (hi[axis] - lo[axis]).abs().max(1.0);
    let mut failure = None;
    let val = integrate(
        |s| {
            x[axis] = s;
            if last {
                f(x)
            } else {
                match nest(f, lo, hi, inner_tol, axis + 1, &mut x.to_vec()) {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            }
        },
        lo[axis],
        hi[axis],
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_and_transcendentals() {
        assert_relative_eq!(
            integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap(),
            9.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        // kink at the origin
        assert_relative_eq!(
            integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn box_integral() {
        let v = integrate_box(&|x| x[0] * x[1] * x[1], &[0.0, -1.0], &[2.0, 1.0], 1e-10).unwrap();
        assert_relative_eq!(v, 2.0 * (2.0 / 3.0), epsilon = 1e-10);
    }
}
