use pinching_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;

/// Random number stream of one trial: the config seed picks the key and
/// the trial index picks the stream, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `K` users drawn uniformly from the `D_x × D_y` ground rectangle
/// centered at the origin.
pub fn generate_users(config: &ExperimentConfig, trial: usize) -> Vec<Point> {
    let mut rng = trial_rng(config.seed, trial);
    let (hx, hy) = (config.region.0 / 2.0, config.region.1 / 2.0);
    (0..config.users)
        .map(|_| {
            let x = rng.gen_range(-hx..=hx);
            let y = rng.gen_range(-hy..=hy);
            Point::ground(x, y)
        })
        .collect()
}
