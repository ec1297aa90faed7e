//! Branch-free sine and cosine for the mode-sum kernels.
//!
//! Cody–Waite reduction by pi/2 (three-part constant) followed by the fdlibm
//! minimax polynomials on [-pi/4, pi/4]. Quadrant selection uses float
//! compares only, so loops over particles vectorize. Max error about 1 ulp
//! for |x| < 1e6; no fused multiply-add is used, so every SIMD width gives
//! bit-identical results.

#![allow(clippy::excessive_precision)]

const FRAC_2_PI: f64 = std::f64::consts::FRAC_2_PI;
const PIO2_1: f64 = 1.570_796_326_734_125_6e0;
const PIO2_2: f64 = 6.077_100_506_506_192e-11;
const PIO2_3: f64 = 2.022_266_248_795_950_6e-21;
// 1.5 * 2^52: adding and subtracting rounds to the nearest integer.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

const S1: f64 = -1.666_666_666_666_663_2e-1;
const S2: f64 = 8.333_333_333_322_49e-3;
const S3: f64 = -1.984_126_982_985_795e-4;
const S4: f64 = 2.755_731_370_707_006_8e-6;
const S5: f64 = -2.505_076_025_340_686_3e-8;
const S6: f64 = 1.589_690_995_211_55e-10;

const C1: f64 = 4.166_666_666_666_660_2e-2;
const C2: f64 = -1.388_888_888_887_411e-3;
const C3: f64 = 2.480_158_728_947_673e-5;
const C4: f64 = -2.755_731_435_139_066_3e-7;
const C5: f64 = 2.087_572_321_298_175e-9;
const C6: f64 = -1.135_964_755_778_819_5e-11;

/// Returns (r, n) with x = n*pi/2 + r, |r| <= pi/4, n in {0,1,2,3} as a float.
#[inline(always)]
fn reduce(x: f64) -> (f64, f64) {
    let q = (x * FRAC_2_PI + ROUND_MAGIC) - ROUND_MAGIC;
    let r = ((x - q * PIO2_1) - q * PIO2_2) - q * PIO2_3;
    let h = q * 0.25;
    let hr = (h + ROUND_MAGIC) - ROUND_MAGIC;
    let fl = if hr > h { hr - 1.0 } else { hr };
    (r, q - 4.0 * fl)
}

#[inline(always)]
fn kernels(r: f64) -> (f64, f64) {
    let z = r * r;
    let s = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
    let c = 1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
    (s, c)
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    let (r, n) = reduce(x);
    let (s, c) = kernels(r);
    let v = if n == 1.0 || n == 3.0 { s } else { c };
    if n == 1.0 || n == 2.0 {
        -v
    } else {
        v
    }
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    let (r, n) = reduce(x);
    let (s, c) = kernels(r);
    let v = if n == 1.0 || n == 3.0 { c } else { s };
    if n == 2.0 || n == 3.0 {
        -v
    } else {
        v
    }
}
