//! Small fixed group sets with reference statistics from
//! `scipy.stats.levene(center="median")`, `scipy.stats.f_oneway` and
//! statsmodels `anova_oneway(use_var="unequal")`.

pub struct GroupFixture {
    pub groups: &'static [&'static [f64]],
    pub levene: f64,
    pub levene_p: f64,
    pub welch: f64,
    pub welch_df_within: f64,
    pub welch_p: f64,
    pub classic: f64,
    pub classic_p: f64,
}

pub const GROUP_FIXTURES: [GroupFixture; 3] = [
    GroupFixture {
        groups: &[
            &[4.1, 5.2, 6.3, 5.5, 4.8],
            &[7.2, 6.9, 8.1, 7.7],
            &[3.3, 2.9, 4.0, 3.6, 3.1, 3.8],
        ],
        levene: 0.690709525676206,
        levene_p: 0.5200851443748038,
        welch: 74.11647180387654,
        welch_df_within: 6.638539138977293,
        welch_p: 2.8812084962493578e-05,
        classic: 52.95930166647765,
        classic_p: 1.110691674695131e-06,
    },
    GroupFixture {
        groups: &[
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            &[2.0, 2.5, 3.0, 3.5],
            &[10.0, 12.0, 9.0, 14.0, 11.0],
            &[5.0, 5.5, 7.0, 4.0, 6.0, 6.5, 5.0],
        ],
        levene: 1.8556753980482794,
        levene_p: 0.17332145678843416,
        welch: 28.936224095165205,
        welch_df_within: 9.279684408189222,
        welch_p: 4.9023895407526446e-05,
        classic: 32.45616212420594,
        classic_p: 1.789885329981489e-07,
    },
    GroupFixture {
        groups: &[&[0.5, 1.5, 2.5, 1.0], &[3.0, 9.0, 1.0, 7.0, 5.0]],
        levene: 4.122794719009229,
        levene_p: 0.08185639523317301,
        welch: 6.021479713603819,
        welch_df_within: 4.710222953575932,
        welch_p: 0.06070775050274004,
        classic: 4.845267489711934,
        classic_p: 0.06361852552459178,
    },
];

impl GroupFixture {
    pub fn owned(&self) -> Vec<Vec<f64>> {
        self.groups.iter().map(|g| g.to_vec()).collect()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Textbook one-way F written out term by term.
pub fn brute_classic(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = mean(&all);
    let k = groups.len() as f64;
    let n = all.len() as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        for v in g {
            ssw += (v - m) * (v - m);
        }
    }
    (ssb / (k - 1.0)) / (ssw / (n - k))
}

/// Welch's F and its denominator degrees of freedom.
pub fn brute_welch(groups: &[Vec<f64>]) -> (f64, f64) {
    let k = groups.len() as f64;
    let w: Vec<f64> = groups.iter().map(|g| g.len() as f64 / var(g)).collect();
    let sw: f64 = w.iter().sum();
    let mw = groups
        .iter()
        .zip(&w)
        .map(|(g, wi)| wi * mean(g))
        .sum::<f64>()
        / sw;
    let a = groups
        .iter()
        .zip(&w)
        .map(|(g, wi)| wi * (mean(g) - mw).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    let lambda = groups
        .iter()
        .zip(&w)
        .map(|(g, wi)| (1.0 - wi / sw).powi(2) / (g.len() as f64 - 1.0))
        .sum::<f64>();
    let b = 1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lambda;
    (a / b, (k * k - 1.0) / (3.0 * lambda))
}

/// Brown-Forsythe: classic F on absolute deviations from group medians.
pub fn brute_levene(groups: &[Vec<f64>]) -> f64 {
    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let mut s = g.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len();
            let med = if n % 2 == 1 {
                s[n / 2]
            } else {
                0.5 * (s[n / 2 - 1] + s[n / 2])
            };
            g.iter().map(|v| (v - med).abs()).collect()
        })
        .collect();
    brute_classic(&z)
}
