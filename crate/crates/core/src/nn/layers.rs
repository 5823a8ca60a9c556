//! Layers operating on whole batches. Convolutions are "valid" with stride 1,
//! pools are non-overlapping and drop any ragged tail.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

fn he_uniform<R: Rng>(rng: &mut R, n: usize, fan_in: usize) -> Vec<f64> {
    let limit = (6.0 / fan_in as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

fn expect_rank(x: &Tensor, rank: usize, what: &str) -> Result<()> {
    if x.shape().len() != rank {
        return Err(Error::Shape {
            expected: format!("rank-{rank} input for {what}"),
            got: format!("{:?}", x.shape()),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `[out, in, kernel]`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1d {
    pub fn new<R: Rng>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = in_channels * kernel;
        Conv1d {
            in_channels,
            out_channels,
            kernel,
            weight: he_uniform(rng, out_channels * fan_in, fan_in),
            bias: vec![0.0; out_channels],
        }
    }

    fn out_len(&self, x: &Tensor) -> Result<usize> {
        expect_rank(x, 3, "conv1d")?;
        let (c, l) = (x.shape()[1], x.shape()[2]);
        if c != self.in_channels || l < self.kernel {
            return Err(Error::Shape {
                expected: format!("[_, {}, >={}]", self.in_channels, self.kernel),
                got: format!("{:?}", x.shape()),
            });
        }
        Ok(l - self.kernel + 1)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let lo = self.out_len(x)?;
        let (b, l, k) = (x.batch(), x.shape()[2], self.kernel);
        let mut y = Tensor::zeros(vec![b, self.out_channels, lo]);
        let out = y.data_mut();
        for n in 0..b {
            let xs = x.item(n);
            for o in 0..self.out_channels {
                let yr = &mut out[(n * self.out_channels + o) * lo..][..lo];
                yr.fill(self.bias[o]);
                for i in 0..self.in_channels {
                    let xr = &xs[i * l..(i + 1) * l];
                    for kk in 0..k {
                        let w = self.weight[(o * self.in_channels + i) * k + kk];
                        for (yv, xv) in yr.iter_mut().zip(&xr[kk..kk + lo]) {
                            *yv += w * xv;
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor, dw: &mut [f64], db: &mut [f64]) -> Tensor {
        let (b, l, k) = (x.batch(), x.shape()[2], self.kernel);
        let lo = l - k + 1;
        let mut dx = Tensor::zeros(x.shape().to_vec());
        let dxd = dx.data_mut();
        for n in 0..b {
            let xs = x.item(n);
            for o in 0..self.out_channels {
                let g = &dy.data()[(n * self.out_channels + o) * lo..][..lo];
                db[o] += g.iter().sum::<f64>();
                for i in 0..self.in_channels {
                    let xr = &xs[i * l..(i + 1) * l];
                    let dxr = &mut dxd[(n * self.in_channels + i) * l..][..l];
                    for kk in 0..k {
                        let wi = (o * self.in_channels + i) * k + kk;
                        let w = self.weight[wi];
                        let mut acc = 0.0;
                        for ((gv, xv), dv) in
                            g.iter().zip(&xr[kk..kk + lo]).zip(&mut dxr[kk..kk + lo])
                        {
                            acc += gv * xv;
                            *dv += w * gv;
                        }
                        dw[wi] += acc;
                    }
                }
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `[out, in, kernel, kernel]`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn new<R: Rng>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = in_channels * kernel * kernel;
        Conv2d {
            in_channels,
            out_channels,
            kernel,
            weight: he_uniform(rng, out_channels * fan_in, fan_in),
            bias: vec![0.0; out_channels],
        }
    }

    fn out_dims(&self, x: &Tensor) -> Result<(usize, usize)> {
        expect_rank(x, 4, "conv2d")?;
        let s = x.shape();
        if s[1] != self.in_channels || s[2] < self.kernel || s[3] < self.kernel {
            return Err(Error::Shape {
                expected: format!("[_, {}, >={k}, >={k}]", self.in_channels, k = self.kernel),
                got: format!("{s:?}"),
            });
        }
        Ok((s[2] - self.kernel + 1, s[3] - self.kernel + 1))
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (ho, wo) = self.out_dims(x)?;
        let (b, h, w, k) = (x.batch(), x.shape()[2], x.shape()[3], self.kernel);
        let mut y = Tensor::zeros(vec![b, self.out_channels, ho, wo]);
        let out = y.data_mut();
        for n in 0..b {
            let xs = x.item(n);
            for o in 0..self.out_channels {
                let ym = &mut out[(n * self.out_channels + o) * ho * wo..][..ho * wo];
                ym.fill(self.bias[o]);
                for i in 0..self.in_channels {
                    let xm = &xs[i * h * w..(i + 1) * h * w];
                    for ky in 0..k {
                        for kx in 0..k {
                            let wv = self.weight[((o * self.in_channels + i) * k + ky) * k + kx];
                            for r in 0..ho {
                                let xr = &xm[(r + ky) * w + kx..][..wo];
                                for (yv, xv) in ym[r * wo..(r + 1) * wo].iter_mut().zip(xr) {
                                    *yv += wv * xv;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor, dw: &mut [f64], db: &mut [f64]) -> Tensor {
        let (b, h, w, k) = (x.batch(), x.shape()[2], x.shape()[3], self.kernel);
        let (ho, wo) = (h - k + 1, w - k + 1);
        let mut dx = Tensor::zeros(x.shape().to_vec());
        let dxd = dx.data_mut();
        for n in 0..b {
            let xs = x.item(n);
            for o in 0..self.out_channels {
                let g = &dy.data()[(n * self.out_channels + o) * ho * wo..][..ho * wo];
                db[o] += g.iter().sum::<f64>();
                for i in 0..self.in_channels {
                    let xm = &xs[i * h * w..(i + 1) * h * w];
                    let dxm = &mut dxd[(n * self.in_channels + i) * h * w..][..h * w];
                    for ky in 0..k {
                        for kx in 0..k {
                            let wi = ((o * self.in_channels + i) * k + ky) * k + kx;
                            let wv = self.weight[wi];
                            let mut acc = 0.0;
                            for r in 0..ho {
                                let off = (r + ky) * w + kx;
                                let gr = &g[r * wo..(r + 1) * wo];
                                for ((gv, xv), dv) in gr
                                    .iter()
                                    .zip(&xm[off..off + wo])
                                    .zip(&mut dxm[off..off + wo])
                                {
                                    acc += gv * xv;
                                    *dv += wv * gv;
                                }
                            }
                            dw[wi] += acc;
                        }
                    }
                }
            }
        }
        dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPool1d {
    pub size: usize,
}

impl MaxPool1d {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        expect_rank(x, 3, "maxpool1d")?;
        let (b, c, l) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let lo = l / self.size;
        if lo == 0 {
            return Err(Error::Shape {
                expected: format!("length >= {}", self.size),
                got: format!("{:?}", x.shape()),
            });
        }
        let mut y = Tensor::zeros(vec![b, c, lo]);
        for (row, yr) in y.data_mut().chunks_mut(lo).enumerate() {
            let xr = &x.data()[row * l..(row + 1) * l];
            for (t, yv) in yr.iter_mut().enumerate() {
                *yv = xr[t * self.size..(t + 1) * self.size]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Tensor {
        let l = x.shape()[2];
        let lo = l / self.size;
        let mut dx = Tensor::zeros(x.shape().to_vec());
        for (row, g) in dy.data().chunks(lo).enumerate() {
            let xr = &x.data()[row * l..(row + 1) * l];
            let dxr = &mut dx.data_mut()[row * l..(row + 1) * l];
            for (t, gv) in g.iter().enumerate() {
                let start = t * self.size;
                let arg = argmax(&xr[start..start + self.size]);
                dxr[start + arg] += gv;
            }
        }
        dx
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPool2d {
    pub size: usize,
}

impl MaxPool2d {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        expect_rank(x, 4, "maxpool2d")?;
        let s = x.shape();
        let (b, c, h, w) = (s[0], s[1], s[2], s[3]);
        let (ho, wo) = (h / self.size, w / self.size);
        if ho == 0 || wo == 0 {
            return Err(Error::Shape {
                expected: format!("spatial extents >= {}", self.size),
                got: format!("{s:?}"),
            });
        }
        let mut y = Tensor::zeros(vec![b, c, ho, wo]);
        let p = self.size;
        for (plane, ym) in y.data_mut().chunks_mut(ho * wo).enumerate() {
            let xm = &x.data()[plane * h * w..(plane + 1) * h * w];
            for r in 0..ho {
                for q in 0..wo {
                    let mut m = f64::NEG_INFINITY;
                    for dr in 0..p {
                        for dq in 0..p {
                            m = m.max(xm[(r * p + dr) * w + q * p + dq]);
                        }
                    }
                    ym[r * wo + q] = m;
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Tensor {
        let s = x.shape();
        let (h, w) = (s[2], s[3]);
        let p = self.size;
        let (ho, wo) = (h / p, w / p);
        let mut dx = Tensor::zeros(s.to_vec());
        for (plane, g) in dy.data().chunks(ho * wo).enumerate() {
            let xm = &x.data()[plane * h * w..(plane + 1) * h * w];
            let dxm = &mut dx.data_mut()[plane * h * w..(plane + 1) * h * w];
            for r in 0..ho {
                for q in 0..wo {
                    let mut best = (r * p) * w + q * p;
                    for dr in 0..p {
                        for dq in 0..p {
                            let idx = (r * p + dr) * w + q * p + dq;
                            if xm[idx] > xm[best] {
                                best = idx;
                            }
                        }
                    }
                    dxm[best] += g[r * wo + q];
                }
            }
        }
        dx
    }
}

pub fn relu_forward(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    for v in y.data_mut() {
        *v = v.max(0.0);
    }
    y
}

pub fn relu_backward(x: &Tensor, dy: &Tensor) -> Tensor {
    let mut dx = dy.clone();
    for (d, xv) in dx.data_mut().iter_mut().zip(x.data()) {
        if *xv <= 0.0 {
            *d = 0.0;
        }
    }
    dx
}

/// Mean over every axis after the channel axis: `[B, C, ...] -> [B, C]`.
pub fn global_avg_pool_forward(x: &Tensor) -> Result<Tensor> {
    if x.shape().len() < 3 {
        return Err(Error::Shape {
            expected: "[batch, channels, spatial...]".into(),
            got: format!("{:?}", x.shape()),
        });
    }
    let (b, c) = (x.shape()[0], x.shape()[1]);
    let area = x.len() / (b * c);
    let data = x
        .data()
        .chunks(area)
        .map(|ch| ch.iter().sum::<f64>() / area as f64)
        .collect();
    Tensor::new(vec![b, c], data)
}

pub fn global_avg_pool_backward(x: &Tensor, dy: &Tensor) -> Tensor {
    let (b, c) = (x.shape()[0], x.shape()[1]);
    let area = x.len() / (b * c);
    let mut dx = Tensor::zeros(x.shape().to_vec());
    for (ch, g) in dx.data_mut().chunks_mut(area).zip(dy.data()) {
        ch.fill(g / area as f64);
    }
    dx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `[out, in]`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Dense {
            inputs,
            outputs,
            weight: he_uniform(rng, inputs * outputs, inputs),
            bias: vec![0.0; outputs],
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        if x.shape().len() != 2 || x.shape()[1] != self.inputs {
            return Err(Error::Shape {
                expected: format!("[_, {}]", self.inputs),
                got: format!("{:?}", x.shape()),
            });
        }
        let b = x.batch();
        let mut y = Tensor::zeros(vec![b, self.outputs]);
        for (n, yr) in y.data_mut().chunks_mut(self.outputs).enumerate() {
            let xr = x.item(n);
            for (o, yv) in yr.iter_mut().enumerate() {
                let wr = &self.weight[o * self.inputs..(o + 1) * self.inputs];
                *yv = self.bias[o] + wr.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, dy: &Tensor, dw: &mut [f64], db: &mut [f64]) -> Tensor {
        let b = x.batch();
        let mut dx = Tensor::zeros(x.shape().to_vec());
        for n in 0..b {
            let xr = x.item(n);
            let g = dy.item(n);
            let dxr = &mut dx.data_mut()[n * self.inputs..(n + 1) * self.inputs];
            for (o, gv) in g.iter().enumerate() {
                db[o] += gv;
                let wr = &self.weight[o * self.inputs..(o + 1) * self.inputs];
                let dwr = &mut dw[o * self.inputs..(o + 1) * self.inputs];
                for ((dwv, xv), (wv, dxv)) in
                    dwr.iter_mut().zip(xr).zip(wr.iter().zip(dxr.iter_mut()))
                {
                    *dwv += gv * xv;
                    *dxv += gv * wv;
                }
            }
        }
        dx
    }
}

/// One stage of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Conv1d(Conv1d),
    Conv2d(Conv2d),
    MaxPool1d(MaxPool1d),
    MaxPool2d(MaxPool2d),
    Relu,
    GlobalAvgPool,
    Dense(Dense),
}

impl Layer {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(l) => l.forward(x),
            Layer::Conv2d(l) => l.forward(x),
            Layer::MaxPool1d(l) => l.forward(x),
            Layer::MaxPool2d(l) => l.forward(x),
            Layer::Relu => Ok(relu_forward(x)),
            Layer::GlobalAvgPool => global_avg_pool_forward(x),
            Layer::Dense(l) => l.forward(x),
        }
    }

    /// Gradient with respect to the input; parameter gradients are added
    /// into `grads` (weight then bias, as returned by [`Layer::params`]).
    pub fn backward(&self, x: &Tensor, dy: &Tensor, grads: &mut [Vec<f64>]) -> Tensor {
        match self {
            Layer::Conv1d(l) => {
                let (dw, db) = split_grads(grads);
                l.backward(x, dy, dw, db)
            }
            Layer::Conv2d(l) => {
                let (dw, db) = split_grads(grads);
                l.backward(x, dy, dw, db)
            }
            Layer::Dense(l) => {
                let (dw, db) = split_grads(grads);
                l.backward(x, dy, dw, db)
            }
            Layer::MaxPool1d(l) => l.backward(x, dy),
            Layer::MaxPool2d(l) => l.backward(x, dy),
            Layer::Relu => relu_backward(x, dy),
            Layer::GlobalAvgPool => global_avg_pool_backward(x, dy),
        }
    }

    pub fn params(&self) -> Vec<&Vec<f64>> {
        match self {
            Layer::Conv1d(l) => vec![&l.weight, &l.bias],
            Layer::Conv2d(l) => vec![&l.weight, &l.bias],
            Layer::Dense(l) => vec![&l.weight, &l.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Conv1d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Conv2d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            _ => Vec::new(),
        }
    }
}

fn split_grads(grads: &mut [Vec<f64>]) -> (&mut [f64], &mut [f64]) {
    let (w, b) = grads.split_at_mut(1);
    (&mut w[0], &mut b[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conv1d_matches_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conv = Conv1d::new(2, 3, 3, &mut rng);
        let x = Tensor::new(vec![1, 2, 6], (0..12).map(|v| (v as f64).sin()).collect()).unwrap();
        let y = conv.forward(&x).unwrap();
        for o in 0..3 {
            for t in 0..4 {
                let mut s = conv.bias[o];
                for i in 0..2 {
                    for k in 0..3 {
                        s += conv.weight[(o * 2 + i) * 3 + k] * x.data()[i * 6 + t + k];
                    }
                }
                assert!((y.data()[o * 4 + t] - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_kernel() {
        let conv = Conv1d {
            in_channels: 1,
            out_channels: 1,
            kernel: 2,
            weight: vec![0.0, 1.0],
            bias: vec![0.5],
        };
        let x = Tensor::new(vec![1, 1, 4], vec![1.0, -2.0, 3.0, 4.0]).unwrap();
        assert_eq!(conv.forward(&x).unwrap().data(), &[-1.5, 3.5, 4.5]);
    }

    #[test]
    fn pools() {
        let x = Tensor::new(vec![1, 1, 5], vec![1.0, 3.0, 2.0, -1.0, 9.0]).unwrap();
        let p = MaxPool1d { size: 2 };
        assert_eq!(p.forward(&x).unwrap().data(), &[3.0, 2.0]);
        let dx = p.backward(&x, &Tensor::new(vec![1, 1, 2], vec![1.0, 2.0]).unwrap());
        assert_eq!(dx.data(), &[0.0, 1.0, 2.0, 0.0, 0.0]);

        let x = Tensor::new(vec![1, 1, 2, 2], vec![1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(MaxPool2d { size: 2 }.forward(&x).unwrap().data(), &[4.0]);
        let g = global_avg_pool_forward(&x).unwrap();
        assert_eq!(g.shape(), &[1, 1]);
        assert_eq!(g.data(), &[2.5]);
    }

    #[test]
    fn conv2d_matches_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let conv = Conv2d::new(2, 2, 2, &mut rng);
        let x = Tensor::new(
            vec![1, 2, 3, 3],
            (0..18).map(|v| (v as f64 * 0.7).cos()).collect(),
        )
        .unwrap();
        let y = conv.forward(&x).unwrap();
        for o in 0..2 {
            for r in 0..2 {
                for q in 0..2 {
                    let mut s = conv.bias[o];
                    for i in 0..2 {
                        for ky in 0..2 {
                            for kx in 0..2 {
                                s += conv.weight[((o * 2 + i) * 2 + ky) * 2 + kx]
                                    * x.data()[i * 9 + (r + ky) * 3 + q + kx];
                            }
                        }
                    }
                    assert!((y.data()[o * 4 + r * 2 + q] - s).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Dense::new(3, 2, &mut rng);
        assert!(matches!(
            d.forward(&Tensor::zeros(vec![1, 4])),
            Err(Error::Shape { .. })
        ));
        let c = Conv1d::new(1, 1, 5, &mut rng);
        assert!(c.forward(&Tensor::zeros(vec![1, 1, 4])).is_err());
    }
}
