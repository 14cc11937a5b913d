//! Adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued integrands.
//!
//! Every component shares the same subdivision. A component is considered
//! converged when its error estimate falls below
//! `max(atol, rtol·|I_j|, floor·∫|f_j|)`; the last term lets integrals that
//! cancel to (nearly) zero stop at the rounding limit instead of refining
//! forever.

use serde::Serialize;

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
    0.123_491_976_262_065_851_077_724_525_443_940,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Cancellation floor as a multiple of `∫|f|`.
    pub floor: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 0.0,
            floor: 64.0 * f64::EPSILON,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadResult<const N: usize> {
    #[serde(with = "array_serde")]
    pub value: [f64; N],
    #[serde(with = "array_serde")]
    pub error: [f64; N],
    /// `∫|f_j|`, the scale against which cancellation is judged.
    #[serde(with = "array_serde")]
    pub abs_integral: [f64; N],
    pub evaluations: usize,
    pub intervals: usize,
    pub converged: bool,
}

mod array_serde {
    use serde::Serializer;

    pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

fn kronrod<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Panel<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kr = [0.0; N];
    let mut ga = [0.0; N];
    let mut ab = [0.0; N];

    let fc = f(center);
    for j in 0..N {
        kr[j] = WGK[10] * fc[j];
        ab[j] = WGK[10] * fc[j].abs();
    }
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for j in 0..N {
            kr[j] += WGK[i] * (f1[j] + f2[j]);
            ab[j] += WGK[i] * (f1[j].abs() + f2[j].abs());
            if i % 2 == 1 {
                ga[j] += WG[i / 2] * (f1[j] + f2[j]);
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut abs = [0.0; N];
    for j in 0..N {
        value[j] = kr[j] * half;
        error[j] = ((kr[j] - ga[j]) * half).abs();
        abs[j] = ab[j] * half.abs();
    }
    Panel {
        a,
        b,
        value,
        error,
        abs,
    }
}

fn tolerance(opts: &QuadOptions, value: f64, abs: f64) -> f64 {
    opts.atol.max(opts.rtol * value.abs()).max(opts.floor * abs)
}

/// Integrates a vector-valued `f` over the consecutive pieces delimited by
/// `breaks` (at least two increasing points).
pub fn integrate_pieces<const N: usize, F>(mut f: F, breaks: &[f64], opts: &QuadOptions) -> QuadResult<N>
where
    F: FnMut(f64) -> [f64; N],
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut panels: Vec<Panel<N>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 21 * panels.len();

    let totals = |panels: &[Panel<N>]| {
        let mut v = [0.0; N];
        let mut e = [0.0; N];
        let mut a = [0.0; N];
        for p in panels {
            for j in 0..N {
                v[j] += p.value[j];
                e[j] += p.error[j];
                a[j] += p.abs[j];
            }
        }
        (v, e, a)
    };

    let mut converged = false;
    loop {
        let (v, e, a) = totals(&panels);
        let tol: Vec<f64> = (0..N).map(|j| tolerance(opts, v[j], a[j])).collect();
        if (0..N).all(|j| e[j] <= tol[j]) {
            converged = true;
            break;
        }
        if panels.len() >= opts.max_intervals {
            break;
        }
        // Bisect the panel contributing most to the worst-converged component.
        let worst = panels
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let w = (0..N)
                    .map(|j| if tol[j] > 0.0 { p.error[j] / tol[j] } else { p.error[j] * 1e300 })
                    .fold(0.0, f64::max);
                (idx, w)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(idx, _)| idx)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            panels.push(p);
            break;
        }
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
        evaluations += 42;
    }

    // Deterministic final reduction in interval order.
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, error, abs_integral) = totals(&panels);
    QuadResult {
        value,
        error,
        abs_integral,
        evaluations,
        intervals: panels.len(),
        converged,
    }
}

/// Vector-valued integral over `[a, b]`.
pub fn integrate_vec<const N: usize, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult<N>
where
    F: FnMut(f64) -> [f64; N],
{
    integrate_pieces(f, &[a, b], opts)
}

/// Scalar integral over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult<1>
where
    F: FnMut(f64) -> f64,
{
    integrate_pieces(|x| [f(x)], &[a, b], opts)
}
