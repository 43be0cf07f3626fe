//! Globally adaptive 21-point Gauss–Kronrod quadrature on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_938_760,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights at XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub(crate) const KRONROD_POINTS: usize = 21;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    // QUADPACK's error rescaling.
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { lo, hi, value, err }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate drops to
/// `abs_tol`, bisecting the segment with the largest error at each step.
#[cfg(test)]
pub(crate) fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<Integral> {
    integrate_with_breaks(f, &[lo, hi], abs_tol, max_evals)
}

/// Like [`integrate`], but starts from the segments delimited by the sorted
/// `breaks`. A feature narrower than the initial segment can fall between
/// all 21 nodes and go unnoticed; breakpoints placed around it prevent that.
pub(crate) fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    max_evals: usize,
) -> Result<Integral> {
    assert!(breaks.len() >= 2, "need at least one segment");
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        debug_assert!(w[0] < w[1], "breakpoints must increase");
        let seg = gauss_kronrod(&mut f, w[0], w[1]);
        evals += KRONROD_POINTS;
        total_err += seg.err;
        heap.push(seg);
    }

    while total_err > abs_tol {
        if evals + 2 * KRONROD_POINTS > max_evals {
            return Err(Error::Quadrature {
                abs_tol,
                evals,
                est_error: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Segment cannot be split further in double precision.
            heap.push(worst);
            return Err(Error::Quadrature {
                abs_tol,
                evals,
                est_error: total_err,
            });
        }
        let left = gauss_kronrod(&mut f, worst.lo, mid);
        let right = gauss_kronrod(&mut f, mid, worst.hi);
        evals += 2 * KRONROD_POINTS;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically; the running update drifts.
        if heap.len() % 64 == 0 {
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let abs_err = heap.iter().map(|s| s.err).sum::<f64>().max(0.0);
    Ok(Integral {
        value,
        abs_err,
        evals,
    })
}
