//! Adaptive explicit Runge–Kutta integrator of order 8(5,3) for complex state vectors.
//!
//! Steps are clipped so the solution lands exactly on every requested stop time,
//! which makes dense output unnecessary.

// Tableau coefficients are kept with their published digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::qalgebra::C64;

/// Right-hand side `dy/dt = f(t, y)`.
pub trait System {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: 1e-8, atol: 1e-10, max_steps: 5_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrator state; buffers are reused across calls.
pub struct Dop853 {
    opts: Options,
    stats: Stats,
    h: Option<f64>,
    n: usize,
    k: [Vec<C64>; 12],
    ystage: Vec<C64>,
    ynew: Vec<C64>,
    fsal_valid: bool,
}

impl Dop853 {
    pub fn new(n: usize, opts: Options) -> Self {
        Dop853 {
            opts,
            stats: Stats::default(),
            h: None,
            n,
            k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
            ystage: vec![C64::new(0.0, 0.0); n],
            ynew: vec![C64::new(0.0, 0.0); n],
            fsal_valid: false,
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Forgets the cached derivative; required when the system changes between calls.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
        self.h = None;
    }

    /// Integrates from `t` through every time in `stops` (ascending, all > `t`),
    /// calling `on_stop(index, time, state)` on arrival.
    pub fn integrate<S, F>(&mut self, sys: &S, mut t: f64, y: &mut [C64], stops: &[f64], h_max: f64, mut on_stop: F) -> Result<()>
    where
        S: System + ?Sized,
        F: FnMut(usize, f64, &[C64]) -> Result<()>,
    {
        assert_eq!(y.len(), self.n, "state length does not match integrator size");
        let mut steps = 0usize;
        for (idx, &stop) in stops.iter().enumerate() {
            if stop < t {
                return Err(Error::Precondition(format!("stop time {stop} precedes current time {t}")));
            }
            while t < stop {
                if !self.fsal_valid {
                    sys.rhs(t, y, &mut self.k[0]);
                    self.stats.rhs_evals += 1;
                    self.fsal_valid = true;
                }
                let mut h = match self.h {
                    Some(h) => h,
                    None => self.initial_step(sys, t, y, h_max),
                }
                .min(h_max);
                let remaining = stop - t;
                // Stops a few ulps ahead are reached without stepping.
                if remaining <= 4.0 * f64::EPSILON * stop.abs() {
                    t = stop;
                    break;
                }
                let landing = h >= remaining * (1.0 - 1e-12);
                if landing {
                    h = remaining;
                }
                if h <= 1e-14 * t.abs().max(1e-3) {
                    return Err(Error::StepUnderflow { t, h });
                }
                steps += 1;
                if steps > self.opts.max_steps {
                    return Err(Error::StepBudget { t, max_steps: self.opts.max_steps });
                }
                let (err, h_new) = self.attempt(sys, t, y, h);
                if err <= 1.0 {
                    self.stats.accepted += 1;
                    y.copy_from_slice(&self.ynew);
                    t = if landing { stop } else { t + h };
                    self.k.swap(0, 3);
                    // Clipping must not shrink the step proposed for the next interval.
                    self.h = Some(if landing { h_new.max(self.h.unwrap_or(h_new)) } else { h_new });
                } else {
                    self.stats.rejected += 1;
                    self.h = Some(h_new);
                }
            }
            on_stop(idx, t, y)?;
        }
        Ok(())
    }

    fn initial_step<S: System + ?Sized>(&mut self, sys: &S, t: f64, y: &[C64], h_max: f64) -> f64 {
        let o = self.opts;
        let sk = |v: &C64| o.atol + o.rtol * v.norm();
        let n = self.n as f64;
        let d0 = (y.iter().map(|v| (v.norm() / sk(v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y.iter().zip(&self.k[0]).map(|(v, f)| (f.norm() / sk(v)).powi(2)).sum::<f64>() / n).sqrt();
        let mut h0 = if d0 <= 1e-10 || d1 <= 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(h_max);
        for i in 0..self.n {
            self.ystage[i] = y[i] + self.k[0][i] * h0;
        }
        sys.rhs(t + h0, &self.ystage, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let d2 = (y
            .iter()
            .zip(self.k[1].iter().zip(&self.k[0]))
            .map(|(v, (f1, f0))| ((f1 - f0).norm() / sk(v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(1.0 / 8.0) };
        (100.0 * h0).min(h1).min(h_max)
    }

    /// One trial step; returns the scaled error and the proposed next step.
    fn attempt<S: System + ?Sized>(&mut self, sys: &S, t: f64, y: &[C64], h: f64) -> (f64, f64) {
        let n = self.n;
        macro_rules! stage {
            ($out:expr, $c:expr, [$(($j:expr, $a:expr)),*]) => {{
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    $( acc += self.k[$j][i] * $a; )*
                    self.ystage[i] = y[i] + acc * h;
                }
                sys.rhs(t + $c * h, &self.ystage, &mut self.k[$out]);
            }};
        }
        stage!(1, C2, [(0, A21)]);
        stage!(2, C3, [(0, A31), (1, A32)]);
        stage!(3, C4, [(0, A41), (2, A43)]);
        stage!(4, C5, [(0, A51), (2, A53), (3, A54)]);
        stage!(5, C6, [(0, A61), (3, A64), (4, A65)]);
        stage!(6, C7, [(0, A71), (3, A74), (4, A75), (5, A76)]);
        stage!(7, C8, [(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)]);
        stage!(8, C9, [(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)]);
        stage!(9, C10, [(0, A101), (3, A104), (4, A105), (5, A106), (6, A107), (7, A108), (8, A109)]);
        stage!(10, C11, [(0, A111), (3, A114), (4, A115), (5, A116), (6, A117), (7, A118), (8, A119), (9, A1110)]);
        // Stage 12 is evaluated at t + h and its increment is the new-state combination.
        for i in 0..n {
            let k = &self.k;
            let acc = k[0][i] * A121
                + k[3][i] * A124
                + k[4][i] * A125
                + k[5][i] * A126
                + k[6][i] * A127
                + k[7][i] * A128
                + k[8][i] * A129
                + k[9][i] * A1210
                + k[10][i] * A1211;
            self.ystage[i] = y[i] + acc * h;
        }
        sys.rhs(t + h, &self.ystage, &mut self.k[11]);

        let o = self.opts;
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let k = &self.k;
            let incr = k[0][i] * B1
                + k[5][i] * B6
                + k[6][i] * B7
                + k[7][i] * B8
                + k[8][i] * B9
                + k[9][i] * B10
                + k[10][i] * B11
                + k[11][i] * B12;
            self.ynew[i] = y[i] + incr * h;
            let sk = o.atol + o.rtol * y[i].norm().max(self.ynew[i].norm());
            let e3 = incr - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
            err2 += (e3.norm() / sk).powi(2);
            let e5 = k[0][i] * ER1
                + k[5][i] * ER6
                + k[6][i] * ER7
                + k[7][i] * ER8
                + k[8][i] * ER9
                + k[9][i] * ER10
                + k[10][i] * ER11
                + k[11][i] * ER12;
            err += (e5.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * err * (1.0 / (deno * n as f64)).sqrt();
        self.stats.rhs_evals += 11;

        let fac11 = err.powf(1.0 / 8.0);
        let h_new = if err <= 1.0 {
            // New derivative at the accepted point goes into slot 3 for the FSAL swap.
            sys.rhs(t + h, &self.ynew, &mut self.k[3]);
            self.stats.rhs_evals += 1;
            let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            h / fac
        } else {
            h / (1.0 / FAC_MIN).min(fac11 / SAFE)
        };
        (err, h_new)
    }
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotor {
        w: f64,
        decay: f64,
    }

    impl System for Rotor {
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            for (d, v) in dy.iter_mut().zip(y) {
                *d = v * C64::new(-self.decay, -self.w);
            }
        }
    }

    struct Driven;

    impl System for Driven {
        // y' = cos(t) y has solution exp(sin t)
        fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = y[0] * t.cos();
        }
    }

    #[test]
    fn damped_rotation_matches_closed_form() {
        let sys = Rotor { w: 40.0, decay: 0.7 };
        let mut ig = Dop853::new(1, Options::default());
        let mut y = vec![C64::new(1.0, 0.0)];
        let stops: Vec<f64> = (1..=20).map(|k| k as f64 * 0.1).collect();
        ig.integrate(&sys, 0.0, &mut y, &stops, f64::INFINITY, |_, t, y| {
            let want = C64::from_polar((-0.7 * t).exp(), -40.0 * t);
            assert!((y[0] - want).norm() < 1e-7, "t={t}: {}", (y[0] - want).norm());
            Ok(())
        })
        .unwrap();
        assert!(ig.stats().accepted > 0);
    }

    #[test]
    fn lands_exactly_on_stops() {
        let mut ig = Dop853::new(1, Options::default());
        let mut y = vec![C64::new(1.0, 0.0)];
        let stops = [0.1, 0.3333, 1.7, 2.0];
        let mut seen = Vec::new();
        ig.integrate(&Driven, 0.0, &mut y, &stops, f64::INFINITY, |i, t, y| {
            seen.push((i, t));
            assert!((y[0].re - t.sin().exp()).abs() < 1e-9);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![(0, 0.1), (1, 0.3333), (2, 1.7), (3, 2.0)]);
    }

    #[test]
    fn step_cap_is_respected() {
        let mut ig = Dop853::new(1, Options::default());
        let mut y = vec![C64::new(1.0, 0.0)];
        ig.integrate(&Driven, 0.0, &mut y, &[1.0], 0.01, |_, _, _| Ok(())).unwrap();
        assert!(ig.stats().accepted >= 100);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = Options { max_steps: 5, ..Options::default() };
        let mut ig = Dop853::new(1, opts);
        let mut y = vec![C64::new(1.0, 0.0)];
        let r = ig.integrate(&Driven, 0.0, &mut y, &[1.0], 0.01, |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::StepBudget { .. })));
    }
}
