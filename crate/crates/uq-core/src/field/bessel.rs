//! Modified Bessel functions of the second kind, K_0 and K_1, with upward
//! recurrence for higher integer orders.
//!
//! For x < 2 the ascending series (with harmonic-number coefficients) is
//! summed directly; for x >= 2 the Steed/Thompson–Barnett continued fraction
//! is used. Both are iterated to machine precision, which matters here: the
//! covariance matrix assembled from these kernels must stay numerically
//! positive semi-definite at the 1e-12 level.

use std::f64::consts::PI;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// K_0 and K_1 together (they share most of the work).
pub fn bessel_k01(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "bessel_k requires x > 0, got {x}");
    if x < 2.0 {
        k01_series(x)
    } else {
        k01_continued_fraction(x)
    }
}

/// K_n(x) for integer order n >= 0 via the stable upward recurrence
/// `K_{j+1} = K_{j-1} + (2j/x) K_j`.
pub fn bessel_kn(n: u32, x: f64) -> f64 {
    let (k0, k1) = bessel_k01(x);
    match n {
        0 => k0,
        1 => k1,
        _ => {
            let mut km = k0;
            let mut k = k1;
            for j in 1..n {
                let next = km + (2.0 * j as f64 / x) * k;
                km = k;
                k = next;
            }
            k
        }
    }
}

/// Ascending series for x < 2:
///   I_0 = sum q^k / (k!)^2,            q = x^2/4
///   K_0 = -(ln(x/2) + gamma) I_0 + sum_{k>=1} H_k q^k / (k!)^2
///   I_1 = (x/2) sum q^k / (k! (k+1)!)
///   K_1 = 1/x + ln(x/2) I_1 - (x/4) sum (H_k + H_{k+1} - 2 gamma) q^k / (k! (k+1)!)
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let lnx2 = (0.5 * x).ln();

    let mut i0 = 1.0;
    let mut k0_sum = 0.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        k0_sum += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(lnx2 + EULER_GAMMA) * i0 + k0_sum;

    let mut i1_sum = 1.0; // k = 0 term of sum q^k/(k!(k+1)!)
    let mut k1_sum = 1.0 - 2.0 * EULER_GAMMA; // H_0 + H_1 - 2 gamma with H_0 = 0, H_1 = 1
    let mut term1 = 1.0;
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term1 *= q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        i1_sum += term1;
        k1_sum += term1 * (hk + hk1 - 2.0 * EULER_GAMMA);
        if term1 < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + lnx2 * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

/// Continued-fraction evaluation for x >= 2 (order 0 and 1 directly).
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 300;
    let a1 = 0.25; // 1/4 - mu^2 with mu = 0
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
