//! Base-station scheduling across users.
//!
//! Each user can be skipped, served directly (quality 1, `D_n` bits) or
//! served with key-information extraction (quality `alpha`, `C_n < D_n`
//! bits). The power each option needs follows from inverting
//! `r = log2(1 + (P*G - L) / N)` with `r = d / T`. Powers are rounded up onto
//! a grid of step `p_quantum`, and a 0/1 knapsack over that grid maximises
//! total quality under `p_max`.
//!
//! Among plans with the same total quality the planner picks, walking users
//! in ascending id order, direct before key-info before skip.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Grid used when the job does not set `p_quantum`: `p_max / 10^4`.
pub const DEFAULT_GRID_STEPS: f64 = 1e4;
pub const BRUTE_FORCE_MAX_USERS: usize = 16;
const MAX_GRID_CELLS: usize = 50_000_000;
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserRequest {
    pub id: u32,
    /// Bits for direct transmission.
    pub d_direct_bits: f64,
    /// Bits for key-information transmission.
    pub d_keyinfo_bits: f64,
    /// Linear noise power.
    pub noise: f64,
}

impl UserRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_keyinfo_bits > 0.0 && self.d_keyinfo_bits < self.d_direct_bits) {
            return Err(Error::Parameter(format!(
                "user {}: need 0 < d_keyinfo_bits < d_direct_bits, got {} and {}",
                self.id, self.d_keyinfo_bits, self.d_direct_bits
            )));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::Parameter(format!("user {}: noise must be positive", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams {
    pub gain: f64,
    pub loss: f64,
    pub deadline_s: f64,
    pub p_max: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_quantum: Option<f64>,
}

impl SchedulerParams {
    pub fn quantum(&self) -> f64 {
        self.p_quantum.unwrap_or(self.p_max / DEFAULT_GRID_STEPS)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive(self.gain, "gain")?;
        positive(self.deadline_s, "deadline_s")?;
        positive(self.p_max, "p_max")?;
        positive(self.quantum(), "p_quantum")?;
        if !(self.loss >= 0.0 && self.loss.is_finite()) {
            return Err(Error::Parameter(format!(
                "loss must be non-negative, got {}",
                self.loss
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// A scheduling job as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub users: Vec<UserRequest>,
    #[serde(flatten)]
    pub params: SchedulerParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Skip,
    Direct,
    KeyInfo,
}

impl Mode {
    /// `-1` skip, `0` direct, `1` key-info.
    pub fn code(self) -> i8 {
        match self {
            Mode::Skip => -1,
            Mode::Direct => 0,
            Mode::KeyInfo => 1,
        }
    }

    fn quality(self, alpha: f64) -> f64 {
        match self {
            Mode::Skip => 0.0,
            Mode::Direct => 1.0,
            Mode::KeyInfo => alpha,
        }
    }

    /// Tie-break rank; higher wins.
    fn rank(self) -> u8 {
        match self {
            Mode::Direct => 2,
            Mode::KeyInfo => 1,
            Mode::Skip => 0,
        }
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.code())
    }
}

const PREFERENCE: [Mode; 3] = [Mode::Direct, Mode::KeyInfo, Mode::Skip];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub user_id: u32,
    pub x: Mode,
    /// Power the chosen mode needs to meet the deadline exactly.
    pub power: f64,
    /// The same power rounded up to the grid, in steps of `p_quantum`.
    pub grid_units: u64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchedulePlan {
    /// One decision per user, in input order.
    pub decisions: Vec<Decision>,
    pub total_quality: f64,
    pub total_power: f64,
    pub p_quantum: f64,
}

/// Power at which sending `d` bits takes exactly `deadline` seconds.
pub fn required_power(d: f64, noise: f64, gain: f64, loss: f64, deadline: f64) -> Result<f64> {
    if gain.is_nan() || gain <= 0.0 {
        return Err(Error::Parameter(format!("gain must be positive, got {gain}")));
    }
    if deadline.is_nan() || deadline <= 0.0 {
        return Err(Error::Parameter(format!("deadline must be positive, got {deadline}")));
    }
    if d < 0.0 {
        return Err(Error::Parameter(format!("bit count must be non-negative, got {d}")));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok((noise * ((d / deadline).exp2() - 1.0) + loss) / gain)
}

/// Shannon rate `log2(1 + (P*G - L)/N)`.
pub fn shannon_rate(power: f64, noise: f64, gain: f64, loss: f64) -> f64 {
    (1.0 + (power * gain - loss) / noise).log2()
}

/// Grid steps needed for `power`, rounding up; `None` when unrepresentable.
fn to_units(power: f64, quantum: f64) -> Option<u64> {
    let r = power / quantum;
    if !r.is_finite() || r > u64::MAX as f64 / 2.0 {
        return None;
    }
    let near = r.round();
    let units = if (r - near).abs() <= GRID_EPS * near.max(1.0) {
        near
    } else {
        r.ceil()
    };
    Some(units as u64)
}

fn budget_units(p_max: f64, quantum: f64) -> Result<usize> {
    let r = p_max / quantum;
    let near = r.round();
    let units = if (r - near).abs() <= GRID_EPS * near.max(1.0) {
        near
    } else {
        r.floor()
    };
    if units > MAX_GRID_CELLS as f64 {
        return Err(Error::Size(format!(
            "power grid of {units} steps is too fine; raise p_quantum"
        )));
    }
    Ok(units as usize)
}

/// Per-user option costs on the grid.
struct Prepared {
    /// Users sorted by id, as indices into the input.
    order: Vec<usize>,
    /// `(direct power, direct units, keyinfo power, keyinfo units)` per input user.
    costs: Vec<(f64, Option<u64>, f64, Option<u64>)>,
    cap: usize,
    quantum: f64,
}

impl Prepared {
    fn new(users: &[UserRequest], params: &SchedulerParams) -> Result<Self> {
        params.validate()?;
        let mut order: Vec<usize> = (0..users.len()).collect();
        order.sort_by_key(|&i| users[i].id);
        if order.windows(2).any(|w| users[w[0]].id == users[w[1]].id) {
            return Err(Error::Parameter("user ids must be unique".into()));
        }
        let quantum = params.quantum();
        let cap = budget_units(params.p_max, quantum)?;
        let mut costs = Vec::with_capacity(users.len());
        for u in users {
            u.validate()?;
            let p0 = required_power(u.d_direct_bits, u.noise, params.gain, params.loss, params.deadline_s)?;
            let p1 = required_power(u.d_keyinfo_bits, u.noise, params.gain, params.loss, params.deadline_s)?;
            costs.push((p0, to_units(p0, quantum), p1, to_units(p1, quantum)));
        }
        Ok(Prepared {
            order,
            costs,
            cap,
            quantum,
        })
    }

    /// Grid cost of `mode` for input user `i`; `None` if it can never fit.
    fn units(&self, i: usize, mode: Mode) -> Option<usize> {
        let u = match mode {
            Mode::Skip => return Some(0),
            Mode::Direct => self.costs[i].1?,
            Mode::KeyInfo => self.costs[i].3?,
        };
        (u <= self.cap as u64).then_some(u as usize)
    }

    fn plan(&self, users: &[UserRequest], alpha: f64, modes_by_input: &[Mode]) -> SchedulePlan {
        let decisions: Vec<Decision> = users
            .iter()
            .zip(modes_by_input)
            .enumerate()
            .map(|(i, (u, &x))| {
                let (power, units) = match x {
                    Mode::Skip => (0.0, 0),
                    Mode::Direct => (self.costs[i].0, self.costs[i].1.unwrap_or(0)),
                    Mode::KeyInfo => (self.costs[i].2, self.costs[i].3.unwrap_or(0)),
                };
                Decision {
                    user_id: u.id,
                    x,
                    power,
                    grid_units: units,
                    quality: x.quality(alpha),
                }
            })
            .collect();
        // Same association order as the optimiser: last user innermost.
        let total_quality = self
            .order
            .iter()
            .rev()
            .fold(0.0, |acc, &i| modes_by_input[i].quality(alpha) + acc);
        let total_power = self.order.iter().map(|&i| decisions[i].power).sum();
        SchedulePlan {
            decisions,
            total_quality,
            total_power,
            p_quantum: self.quantum,
        }
    }
}

/// Knapsack dynamic programme over the power grid.
///
/// `best[k][b]` is the highest quality reachable by the users from position
/// `k` (in id order) onwards with `b` grid steps left. A forward pass then
/// takes, user by user, the most preferred mode that still attains the optimum.
pub fn optimize(users: &[UserRequest], params: &SchedulerParams) -> Result<SchedulePlan> {
    let prep = Prepared::new(users, params)?;
    let n = users.len();
    let width = prep.cap + 1;
    if (n + 1).saturating_mul(width) > MAX_GRID_CELLS {
        return Err(Error::Size(format!("{n} users x {width} grid cells is too large")));
    }
    let mut best = vec![0.0f64; (n + 1) * width];
    for k in (0..n).rev() {
        let i = prep.order[k];
        let opts: Vec<(usize, f64)> = PREFERENCE
            .iter()
            .filter_map(|&m| prep.units(i, m).map(|u| (u, m.quality(params.alpha))))
            .collect();
        for b in 0..width {
            let mut v = f64::NEG_INFINITY;
            for &(u, q) in &opts {
                if u <= b {
                    v = v.max(q + best[(k + 1) * width + b - u]);
                }
            }
            best[k * width + b] = v;
        }
    }

    let mut modes = vec![Mode::Skip; n];
    let mut b = prep.cap;
    for k in 0..n {
        let i = prep.order[k];
        let target = best[k * width + b];
        for m in PREFERENCE {
            let Some(u) = prep.units(i, m) else { continue };
            if u <= b && m.quality(params.alpha) + best[(k + 1) * width + b - u] == target {
                modes[i] = m;
                b -= u;
                break;
            }
        }
    }
    Ok(prep.plan(users, params.alpha, &modes))
}

/// Exhaustive search over all `3^n` decision vectors on the same grid and
/// with the same tie-break as [`optimize`]. Limited to 16 users.
pub fn brute_force(users: &[UserRequest], params: &SchedulerParams) -> Result<SchedulePlan> {
    if users.len() > BRUTE_FORCE_MAX_USERS {
        return Err(Error::Size(format!(
            "brute force handles at most {BRUTE_FORCE_MAX_USERS} users, got {}",
            users.len()
        )));
    }
    let prep = Prepared::new(users, params)?;
    let n = users.len();
    let mut current = vec![Mode::Skip; n];
    let mut best: Option<(f64, Vec<u8>, Vec<Mode>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut used = 0usize;
        let mut feasible = true;
        for k in 0..n {
            let m = PREFERENCE[c % 3];
            c /= 3;
            let i = prep.order[k];
            match prep.units(i, m) {
                Some(u) => used += u,
                None => feasible = false,
            }
            current[i] = m;
        }
        if !feasible || used > prep.cap {
            continue;
        }
        let quality = prep
            .order
            .iter()
            .rev()
            .fold(0.0, |acc, &i| current[i].quality(params.alpha) + acc);
        let ranks: Vec<u8> = prep.order.iter().map(|&i| current[i].rank()).collect();
        let better = match &best {
            None => true,
            Some((q, r, _)) => quality > *q || (quality == *q && ranks > *r),
        };
        if better {
            best = Some((quality, ranks, current.clone()));
        }
    }
    let modes = best.map(|b| b.2).unwrap_or_default();
    Ok(prep.plan(users, params.alpha, &modes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(p_max: f64, alpha: f64, quantum: f64) -> SchedulerParams {
        SchedulerParams {
            gain: 1.0,
            loss: 0.0,
            deadline_s: 1.0,
            p_max,
            alpha,
            p_quantum: Some(quantum),
        }
    }

    /// A user whose direct/key-info powers are exactly `p0`/`p1` at
    /// gain 1, loss 0, deadline 1, noise 1: `d = log2(1 + p)`.
    fn user_with_powers(id: u32, p0: f64, p1: f64) -> UserRequest {
        UserRequest {
            id,
            d_direct_bits: (1.0 + p0).log2(),
            d_keyinfo_bits: (1.0 + p1).log2(),
            noise: 1.0,
        }
    }

    #[test]
    fn zero_bits_need_zero_power() {
        assert_eq!(required_power(0.0, 3.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_rate_needs_unit_power() {
        assert_eq!(required_power(1.0, 1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(required_power(1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(required_power(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(required_power(1.0, 1.0, -1.0, 0.0, 1.0).is_err());
        let mut p = params(10.0, 0.5, 1.0);
        p.alpha = 1.0;
        assert!(optimize(&[], &p).is_err());
        let bad = UserRequest {
            id: 0,
            d_direct_bits: 1.0,
            d_keyinfo_bits: 2.0,
            noise: 1.0,
        };
        assert!(optimize(&[bad], &params(10.0, 0.5, 1.0)).is_err());
    }

    #[test]
    fn shannon_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let d = rng.gen_range(0.1..50.0);
            let noise = rng.gen_range(0.01..10.0);
            let gain = rng.gen_range(0.1..10.0);
            let loss = rng.gen_range(0.0..5.0);
            let deadline = rng.gen_range(0.5..20.0);
            let p = required_power(d, noise, gain, loss, deadline).unwrap();
            let bits = shannon_rate(p, noise, gain, loss) * deadline;
            assert!((bits - d).abs() <= 1e-9 * d, "{bits} vs {d}");
        }
    }

    #[test]
    fn infeasible_single_user_is_skipped() {
        let plan = optimize(&[user_with_powers(1, 6.0, 3.0)], &params(2.0, 0.5, 1.0)).unwrap();
        assert_eq!(plan.decisions[0].x, Mode::Skip);
        assert_eq!(plan.decisions[0].power, 0.0);
        assert_eq!(plan.total_quality, 0.0);
    }

    #[test]
    fn two_user_example() {
        let users = [user_with_powers(1, 6.0, 3.0), user_with_powers(2, 5.0, 2.0)];
        // Oracle: all nine decision vectors, grid powers {0, P_n0, P_n1}.
        let options = |p0: f64, p1: f64| [(0.0, 0.0), (p0, 1.0), (p1, 0.5)];
        let mut best = 0.0f64;
        for (a, qa) in options(6.0, 3.0) {
            for (b, qb) in options(5.0, 2.0) {
                if a + b <= 10.0 {
                    best = best.max(qa + qb);
                }
            }
        }
        assert_eq!(best, 1.5);

        let p = params(10.0, 0.5, 1.0);
        let plan = optimize(&users, &p).unwrap();
        assert_eq!(plan.total_quality, 1.5);
        assert_eq!(plan, brute_force(&users, &p).unwrap());
        let modes: Vec<Mode> = plan.decisions.iter().map(|d| d.x).collect();
        // Both (direct, key-info) and (key-info, direct) reach 1.5; the lower
        // id gets the preferred mode.
        assert_eq!(modes, vec![Mode::Direct, Mode::KeyInfo]);
        assert!(plan.decisions.iter().map(|d| d.grid_units).sum::<u64>() <= 10);
    }

    #[test]
    fn unconstrained_all_direct() {
        let users: Vec<_> = (0..5).map(|i| user_with_powers(i, 2.0 + i as f64, 1.0)).collect();
        let sum: f64 = (0..5).map(|i| 2.0 + i as f64).sum();
        let plan = optimize(&users, &params(sum, 0.3, 0.5)).unwrap();
        assert!(plan.decisions.iter().all(|d| d.x == Mode::Direct));
        assert_eq!(plan.total_quality, 5.0);
    }

    #[test]
    fn empty_input() {
        let p = params(10.0, 0.5, 1.0);
        let plan = optimize(&[], &p).unwrap();
        assert!(plan.decisions.is_empty());
        assert_eq!(plan.total_quality, 0.0);
        assert_eq!(brute_force(&[], &p).unwrap().total_quality, 0.0);
    }

    #[test]
    fn decisions_keep_input_order() {
        let users = [user_with_powers(9, 6.0, 3.0), user_with_powers(2, 5.0, 2.0)];
        let plan = optimize(&users, &params(10.0, 0.5, 1.0)).unwrap();
        assert_eq!(plan.decisions[0].user_id, 9);
        // id 2 is first in tie-break order, so it gets direct.
        assert_eq!(plan.decisions[1].x, Mode::Direct);
        assert_eq!(plan.decisions[0].x, Mode::KeyInfo);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let users = [user_with_powers(1, 6.0, 3.0), user_with_powers(1, 5.0, 2.0)];
        assert!(optimize(&users, &params(10.0, 0.5, 1.0)).is_err());
    }

    #[test]
    fn brute_force_size_limit() {
        let users: Vec<_> = (0..17).map(|i| user_with_powers(i, 2.0, 1.0)).collect();
        assert!(matches!(
            brute_force(&users, &params(10.0, 0.5, 1.0)),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn default_quantum_is_ten_thousandth() {
        let mut p = params(7.0, 0.5, 1.0);
        p.p_quantum = None;
        assert_eq!(p.quantum(), 7.0 / 1e4);
        let plan = optimize(&[user_with_powers(1, 6.0, 3.0)], &p).unwrap();
        assert_eq!(plan.decisions[0].x, Mode::Direct);
        assert_eq!(plan.decisions[0].grid_units, 8572); // ceil(6 / 0.0007)
    }

    #[test]
    fn job_json_parses() {
        let job: Job = serde_json::from_str(
            r#"{"users": [{"id": 1, "d_direct_bits": 3.0, "d_keyinfo_bits": 1.5, "noise": 0.5}],
                "gain": 2.0, "loss": 0.1, "deadline_s": 1.0, "p_max": 4.0, "alpha": 0.6, "p_quantum": 0.01}"#,
        )
        .unwrap();
        assert_eq!(job.users.len(), 1);
        assert_eq!(job.params.p_quantum, Some(0.01));
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<UserRequest>, SchedulerParams) {
        let users = (0..n as u32)
            .map(|id| {
                let d = rng.gen_range(1.0..8.0);
                UserRequest {
                    id,
                    d_direct_bits: d,
                    d_keyinfo_bits: d * rng.gen_range(0.05..0.9),
                    noise: rng.gen_range(0.1..3.0),
                }
            })
            .collect();
        let p = SchedulerParams {
            gain: rng.gen_range(0.5..4.0),
            loss: rng.gen_range(0.0..1.0),
            deadline_s: rng.gen_range(0.5..3.0),
            p_max: rng.gen_range(5.0..200.0),
            alpha: rng.gen_range(0.05..0.95),
            p_quantum: Some(rng.gen_range(0.05..1.0)),
        };
        (users, p)
    }

    #[test]
    fn optimize_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let n = rng.gen_range(0..=8);
            let (users, p) = random_instance(&mut rng, n);
            let dp = optimize(&users, &p).unwrap();
            let bf = brute_force(&users, &p).unwrap();
            assert_eq!(dp, bf);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn plans_are_feasible(seed in any::<u64>(), n in 0usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (users, p) = random_instance(&mut rng, n);
            let plan = optimize(&users, &p).unwrap();
            prop_assert!(plan.total_power <= p.p_max * (1.0 + 1e-9));
            let units: u64 = plan.decisions.iter().map(|d| d.grid_units).sum();
            prop_assert!(units as f64 * p.quantum() <= p.p_max * (1.0 + 1e-9));
            let q: f64 = plan.decisions.iter().map(|d| d.quality).sum();
            prop_assert!((q - plan.total_quality).abs() < 1e-9);
            for d in &plan.decisions {
                match d.x {
                    Mode::Skip => prop_assert!(d.power == 0.0 && d.quality == 0.0),
                    Mode::Direct => prop_assert_eq!(d.quality, 1.0),
                    Mode::KeyInfo => prop_assert_eq!(d.quality, p.alpha),
                }
            }
        }

        #[test]
        fn more_power_never_hurts(seed in any::<u64>(), n in 0usize..8, extra in 0.0f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (users, p) = random_instance(&mut rng, n);
            let richer = SchedulerParams { p_max: p.p_max + extra, ..p };
            prop_assert!(optimize(&users, &richer).unwrap().total_quality >= optimize(&users, &p).unwrap().total_quality);
        }

        #[test]
        fn consistent_scaling_keeps_decisions(seed in any::<u64>(), n in 1usize..8, k in prop::sample::select(vec![0.25f64, 0.5, 2.0, 4.0, 8.0])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (users, p) = random_instance(&mut rng, n);
            let scaled_users: Vec<_> = users.iter().map(|u| UserRequest { noise: u.noise * k, ..*u }).collect();
            let scaled = SchedulerParams {
                loss: p.loss * k,
                p_max: p.p_max * k,
                p_quantum: p.p_quantum.map(|q| q * k),
                ..p
            };
            let a: Vec<Mode> = optimize(&users, &p).unwrap().decisions.iter().map(|d| d.x).collect();
            let b: Vec<Mode> = optimize(&scaled_users, &scaled).unwrap().decisions.iter().map(|d| d.x).collect();
            prop_assert_eq!(a, b);
        }
    }
}
