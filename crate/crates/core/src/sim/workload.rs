//! Arrival sampling.
//!
//! Every profile has its own ChaCha8 stream, seeded from the scenario seed
//! and selected by the profile id, so adding or removing one profile never
//! perturbs the others and a longer horizon only appends arrivals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};

use crate::network::TrafficProfile;
use crate::scenario::{ScenarioConfig, VolumeDistribution};

#[derive(Clone, Debug, PartialEq)]
pub struct Arrival {
    pub time: f64,
    /// Index into the scenario's profile list.
    pub profile: usize,
    pub volume_mbit: f64,
}

/// The random stream used for profile `profile_id` under `seed`.
pub fn profile_rng(seed: u64, profile_id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(profile_id));
    rng
}

fn draw_volume<R: Rng>(rng: &mut R, profile: &TrafficProfile, dist: VolumeDistribution) -> f64 {
    let [lo, hi] = profile.volume_mbit;
    if hi <= lo {
        return lo;
    }
    match dist {
        VolumeDistribution::ClampedExponential => {
            let mean = 0.5 * (lo + hi);
            let exp = Exp::new(1.0 / mean).expect("mean is positive");
            exp.sample(rng).clamp(lo, hi)
        }
        VolumeDistribution::Uniform => Uniform::new_inclusive(lo, hi)
            .expect("range is ordered")
            .sample(rng),
    }
}

/// All arrivals in `[0, horizon]`, ordered by time then profile position.
pub fn sample_workload(config: &ScenarioConfig) -> Vec<Arrival> {
    let mut out = Vec::new();
    for (m, profile) in config.profiles.iter().enumerate() {
        let rate = config.effective_rate(m);
        if rate <= 0.0 {
            continue;
        }
        let gap = Exp::new(rate).expect("rate is positive");
        let mut rng = profile_rng(config.seed, profile.id);
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut rng);
            if t > config.horizon_s {
                break;
            }
            let volume_mbit = draw_volume(&mut rng, profile, config.volume_distribution);
            out.push(Arrival {
                time: t,
                profile: m,
                volume_mbit,
            });
        }
    }
    out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.profile.cmp(&b.profile)));
    out
}
