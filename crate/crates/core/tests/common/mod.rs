//! Arbitrary-precision reference evaluations shared by the integration tests.
//!
//! Everything here is computed at 256 bits with astro-float and only converted
//! to `f64` at the end, so it is independent of the library's binary64 code.
#![allow(dead_code)]

pub mod dihedral;

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Hp {
    cc: Consts,
}

impl Hp {
    pub fn new() -> Self {
        Hp {
            cc: Consts::new().expect("constant cache"),
        }
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    pub fn int(&self, k: u64) -> BigFloat {
        BigFloat::from_u64(k, P)
    }

    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        x.to_string().parse().expect("decimal rendering")
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, P, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, P, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, P, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, P, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(P, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(P, RM, &mut self.cc)
    }

    pub fn log2(&mut self, a: &BigFloat) -> BigFloat {
        a.log2(P, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(P, RM, &mut self.cc)
    }

    pub fn exp2(&mut self, a: &BigFloat) -> BigFloat {
        let two = self.int(2);
        two.pow(a, P, RM, &mut self.cc)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(P, RM)
    }

    pub fn binary_entropy(&mut self, g: f64) -> BigFloat {
        if g == 0.0 || g == 1.0 {
            return self.int(0);
        }
        let g = self.num(g);
        let h = self.sub(&self.int(1), &g);
        let lg = self.log2(&g);
        let lh = self.log2(&h);
        let a = self.mul(&g, &lg);
        let b = self.mul(&h, &lh);
        self.add(&a, &b).neg()
    }

    /// `C(n, k)` as an exact big float (fits easily for the sizes used).
    pub fn choose(&self, n: u64, k: u64) -> BigFloat {
        let mut acc = self.int(1);
        for i in 0..k {
            acc = self.mul(&acc, &self.int(n - i));
            acc = self.div(&acc, &self.int(i + 1));
        }
        acc
    }

    /// `C(n, n/2)^-1 Σ_k C(n/2, k)^2 (2 sqrt(δε))^k`
    pub fn rn_exact_sum(&mut self, n: u64, delta: f64, epsilon: f64) -> f64 {
        let x = self.mul(
            &self.int(2),
            &self.sqrt(&self.mul(&self.num(delta), &self.num(epsilon))),
        );
        let h = n / 2;
        let mut total = self.int(0);
        let mut power = self.int(1);
        for k in 0..=h {
            let c = self.choose(h, k);
            total = self.add(&total, &self.mul(&self.mul(&c, &c), &power));
            power = self.mul(&power, &x);
        }
        let r = self.div(&total, &self.choose(n, h));
        self.to_f64(&r)
    }

    /// `sqrt(e) (1/2 + sqrt(δε))^(n/2)`
    pub fn rn_closed_form(&mut self, n: u64, delta: f64, epsilon: f64) -> f64 {
        let base = self.add(
            &self.num(0.5),
            &self.sqrt(&self.mul(&self.num(delta), &self.num(epsilon))),
        );
        let half = self.exp(&self.num(0.5));
        let r = self.mul(&half, &base.powi((n / 2) as usize, P, RM));
        self.to_f64(&r)
    }

    pub fn rn_mode_failure(&mut self, n: u64, delta: f64, epsilon: f64, gamma: f64) -> f64 {
        let base = self.add(
            &self.num(0.5),
            &self.sqrt(&self.mul(&self.num(delta), &self.num(epsilon))),
        );
        let one_minus = self.sub(&self.int(1), &self.num(gamma));
        let lg = self.log2(&base);
        let mut e = self.mul(&one_minus, &lg);
        let h = self.binary_entropy(gamma);
        e = self.add(&e, &h);
        let ln2 = self.ln(&self.int(2));
        let corr = self.div(&self.int(1), &self.mul(&ln2, &self.int(n)));
        e = self.add(&e, &corr);
        e = self.mul(&e, &self.div(&self.int(n), &self.int(2)));
        let r = self.exp2(&e);
        self.to_f64(&r)
    }
}

/// Inputs of the secrecy exponent, all as plain numbers.
pub struct SecrecyArgs {
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub n_m: u64,
    pub n_n: u64,
    pub theta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub key_len: u64,
    pub syndrome_len: u64,
    pub tau: f64,
}

impl Hp {
    /// `lg(1 - e^{-2aX²}/sqrt(2πaX²))` and `lg(1 - sqrt((a+b)/(π³Y²)) e^{-2π²Y²/(a+b)})`
    /// for cutoffs `X = Mδ`, `Y = Nε`.
    pub fn truncation_lg(
        &mut self,
        a: f64,
        b: f64,
        x_cut: f64,
        p_cut: f64,
    ) -> (BigFloat, BigFloat) {
        let one = self.int(1);
        let pi = self.pi();
        let (a, b) = (self.num(a), self.num(b));
        let x2 = self.mul(&self.num(x_cut), &self.num(x_cut));
        let ax2 = self.mul(&a, &x2);
        let e = self.exp(&self.mul(&self.int(2), &ax2).neg());
        let tq = self.div(
            &e,
            &self.sqrt(&self.mul(&self.mul(&self.int(2), &pi), &ax2)),
        );
        let lq = self.log2(&self.sub(&one, &tq));

        let y2 = self.mul(&self.num(p_cut), &self.num(p_cut));
        let apb = self.add(&a, &b);
        let pi3 = self.mul(&self.mul(&pi, &pi), &pi);
        let pref = self.sqrt(&self.div(&apb, &self.mul(&pi3, &y2)));
        let arg = self.div(
            &self.mul(&self.mul(&self.int(2), &self.mul(&pi, &pi)), &y2),
            &apb,
        );
        let ex = self.exp(&arg.neg());
        let tp = self.mul(&pref, &ex);
        let lp = self.log2(&self.sub(&one, &tp));
        (lq, lp)
    }

    /// `-(1-γ)lg(1/2+sqrt(δε)) - (1+n_N)h(γ)` plus both truncation terms.
    #[allow(clippy::too_many_arguments)]
    pub fn asymptotic_lhs(
        &mut self,
        gamma: f64,
        a: f64,
        b: f64,
        delta: f64,
        epsilon: f64,
        n_n: u64,
        x_cut: f64,
        p_cut: f64,
    ) -> f64 {
        let base = self.add(
            &self.num(0.5),
            &self.sqrt(&self.mul(&self.num(delta), &self.num(epsilon))),
        );
        let lg = self.log2(&base);
        let mut v = self
            .mul(&self.sub(&self.int(1), &self.num(gamma)), &lg)
            .neg();
        let h = self.binary_entropy(gamma);
        v = self.sub(&v, &self.mul(&self.int(1 + n_n), &h));
        let (lq, lp) = self.truncation_lg(a, b, x_cut, p_cut);
        v = self.add(&self.add(&v, &lq), &lp);
        self.to_f64(&v)
    }

    /// `log2` of the first summand of the secrecy parameter.
    pub fn secrecy_log2_first(&mut self, s: &SecrecyArgs) -> f64 {
        let n = self.int(s.n);
        let gt = self.add(&self.num(s.gamma), &self.num(s.tau));
        let base = self.add(
            &self.num(0.5),
            &self.sqrt(&self.mul(&self.num(s.delta), &self.num(s.epsilon))),
        );
        let lg = self.log2(&base);
        let mut v = self.mul(&self.sub(&self.int(1), &gt), &lg);
        let gt_f = self.to_f64(&gt);
        let h = self.binary_entropy(gt_f);
        v = self.add(&v, &h);
        v = self.add(&v, &self.mul(&self.num(s.theta), &self.int(s.n_m)));
        v = self.add(&v, &self.div(&self.int(2 * s.syndrome_len), &n));
        v = self.add(&v, &self.mul(&self.num(s.eta), &self.int(s.n_n)));
        let x_cut = (1u64 << (s.n_m - 1)) as f64 * s.delta;
        let p_cut = (1u64 << (s.n_n - 1)) as f64 * s.epsilon;
        let (lq, lp) = self.truncation_lg(s.a, s.b, x_cut, p_cut);
        v = self.sub(&self.sub(&v, &lq), &lp);
        let kl = self.sub(&self.int(s.key_len), &self.int(2));
        v = self.add(&v, &self.div(&self.mul(&self.int(2), &kl), &n));
        let ln2 = self.ln(&self.int(2));
        v = self.add(&v, &self.div(&self.int(1), &self.mul(&ln2, &n)));
        let r = self.mul(&self.div(&n, &self.int(4)), &v);
        self.to_f64(&r)
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
