//! Standard normal distribution and density.
//!
//! `norm_cdf` uses Hart's double-precision rational approximation of the
//! normal tail (as popularized by G. West), which is accurate to roughly
//! 1e-15 absolute over the whole real line. Beyond |t| = 37 the tail
//! underflows and the result saturates to exactly 0 or 1.

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal cumulative distribution function Φ(t).
pub fn norm_cdf(t: f64) -> f64 {
    let x = t.abs();
    let tail = if x > 37.0 {
        0.0
    } else {
        let e = (-0.5 * x * x).exp();
        if x < 7.071_067_811_865_47 {
            let num = (((((3.526_249_659_989_11e-2 * x + 0.700_383_064_443_688) * x
                + 6.373_962_203_531_65)
                * x
                + 33.912_866_078_383)
                * x
                + 112.079_291_497_871)
                * x
                + 221.213_596_169_931)
                * x
                + 220.206_867_912_376;
            let den = ((((((8.838_834_764_831_84e-2 * x + 1.755_667_163_182_64) * x
                + 16.064_177_579_207)
                * x
                + 86.780_732_202_946_1)
                * x
                + 296.564_248_779_674)
                * x
                + 637.333_633_378_831)
                * x
                + 793.826_512_519_948)
                * x
                + 440.413_735_824_752;
            e * num / den
        } else {
            let mut c = x + 0.65;
            c = x + 4.0 / c;
            c = x + 3.0 / c;
            c = x + 2.0 / c;
            c = x + 1.0 / c;
            e / c / SQRT_2PI
        }
    };
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Standard normal density φ(t).
pub fn norm_pdf(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}
