//! Central finite differences against backprop for both model variants.

use bvpkit::nn::gradcheck::check_model;
use bvpkit::nn::{Model, ModelConfig, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bvpkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = [
        (ModelConfig::raw1d(64, 3), vec![2, 64]),
        (ModelConfig::gaf2d(12, 3), vec![2, 12, 12]),
    ];
    for (cfg, shape) in cases {
        let model = Model::new(cfg)?;
        let n = shape.iter().product();
        let x = Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let err = check_model(&model, &x, &[0, 3], 1e-5)?;
        println!(
            "{}: {} parameters, max relative error {err:.2e}",
            model.config().variant,
            model.param_count()
        );
    }
    Ok(())
}
