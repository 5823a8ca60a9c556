//! Reference statistics for the seeded canonical series.
//!
//! Produced by statsmodels 0.14.6 (`adfuller` with `autolag="AIC"` and
//! `maxlag = floor(12 (n/100)^0.25)`, `kpss` with `nlags = floor(4 (n/100)^0.25)`)
//! on the exact sample vectors emitted by `bvpkit::signals` for these seeds.

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    WhiteNoise,
    RandomWalk,
    Trend,
}

pub struct Reference {
    pub name: &'static str,
    pub kind: Kind,
    pub n: usize,
    pub seed: u64,
    /// First and last samples, to catch generator drift.
    pub sentinel: Option<(f64, f64)>,
    pub adf_c: f64,
    pub adf_c_lag: usize,
    pub adf_ct: f64,
    pub adf_ct_lag: usize,
    pub kpss_c: f64,
    pub kpss_ct: f64,
}

pub const TREND_SLOPE: f64 = 0.05;

pub fn series(r: &Reference) -> Vec<f64> {
    match r.kind {
        Kind::WhiteNoise => bvpkit::signals::white_noise(r.n, r.seed),
        Kind::RandomWalk => bvpkit::signals::random_walk(r.n, r.seed),
        Kind::Trend => bvpkit::signals::trend_plus_noise(r.n, TREND_SLOPE, r.seed),
    }
}

pub const REFERENCES: [Reference; 6] = [
    Reference {
        name: "white_noise_500",
        kind: Kind::WhiteNoise,
        n: 500,
        seed: 11,
        sentinel: Some((-0.7253071115339691, -0.4946036886658999)),
        adf_c: -22.8991911586,
        adf_c_lag: 0,
        adf_ct: -22.9128814081,
        adf_ct_lag: 0,
        kpss_c: 0.1991803629,
        kpss_ct: 0.1218939048,
    },
    Reference {
        name: "white_noise_2000",
        kind: Kind::WhiteNoise,
        n: 2000,
        seed: 12,
        sentinel: None,
        adf_c: -43.1066471590,
        adf_c_lag: 0,
        adf_ct: -43.1065536423,
        adf_ct_lag: 0,
        kpss_c: 0.2087062228,
        kpss_ct: 0.1440369824,
    },
    Reference {
        name: "random_walk_500",
        kind: Kind::RandomWalk,
        n: 500,
        seed: 21,
        sentinel: None,
        adf_c: -0.8904837499,
        adf_c_lag: 8,
        adf_ct: -1.5828132126,
        adf_ct_lag: 8,
        kpss_c: 2.6892909914,
        kpss_ct: 1.6305019341,
    },
    Reference {
        name: "random_walk_2000",
        kind: Kind::RandomWalk,
        n: 2000,
        seed: 22,
        sentinel: Some((0.6517691188314678, -0.06120664063432746)),
        adf_c: -1.0939901576,
        adf_c_lag: 0,
        adf_ct: -0.3020978354,
        adf_ct_lag: 0,
        kpss_c: 9.4514461386,
        kpss_ct: 3.1966300806,
    },
    Reference {
        name: "trend_noise_500",
        kind: Kind::Trend,
        n: 500,
        seed: 31,
        sentinel: Some((1.0928596961014434, 23.768131343563994)),
        adf_c: -0.0288404162,
        adf_c_lag: 15,
        adf_ct: -22.2435232963,
        adf_ct_lag: 0,
        kpss_c: 8.4030518583,
        kpss_ct: 0.0395485186,
    },
    Reference {
        name: "trend_noise_2000",
        kind: Kind::Trend,
        n: 2000,
        seed: 32,
        sentinel: None,
        adf_c: -0.1009397866,
        adf_c_lag: 24,
        adf_ct: -43.6391948021,
        adf_ct_lag: 0,
        kpss_c: 22.3222848558,
        kpss_ct: 0.0621699422,
    },
];
