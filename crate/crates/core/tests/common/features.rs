//! Scalar reference descriptors: direct per-pixel loops, naive DFTs and
//! explicit window sums.

use std::f64::consts::{PI, TAU};

use profileiq::imagefeat::colour::{
    ACHROMATIC_MAX_S, BLACK_MAX_V, BLUE_END, BROWN_MAX_V, GREEN_END, ORANGE_END, PINK_END, PINK_MAX_S,
    PINK_MIN_V, PURPLE_END, RED_END, WHITE_MIN_V, YELLOW_END,
};

/// Row-major RGB pixels.
pub struct Rgb {
    pub w: usize,
    pub h: usize,
    pub px: Vec<[f64; 3]>,
}

impl Rgb {
    pub fn from_image(img: &profileiq::imagefeat::ImageMatrix) -> Self {
        Rgb { w: img.width(), h: img.height(), px: img.pixels().to_vec() }
    }

    pub fn gray(&self) -> Vec<f64> {
        self.px.iter().map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect()
    }

    pub fn hsv(&self) -> Vec<[f64; 3]> {
        self.px.iter().map(|&p| hsv(p)).collect()
    }
}

pub fn hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let c = max - min;
    let s = if max > 0.0 { c / max } else { 0.0 };
    if c <= 0.0 {
        return [0.0, s, max];
    }
    let deg = if max == r {
        60.0 * ((g - b) / c).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / c + 2.0)
    } else {
        60.0 * ((r - g) / c + 4.0)
    };
    let h = deg / 360.0;
    [if h >= 1.0 { h - 1.0 } else { h }, s, max]
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pop_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Colour-name index in feature order (black, blue, brown, green, grey,
/// orange, pink, purple, red, white, yellow).
pub fn colour_name_index(h: f64, s: f64, v: f64) -> usize {
    if v < BLACK_MAX_V {
        return 0;
    }
    if s < ACHROMATIC_MAX_S {
        return if v >= WHITE_MIN_V { 9 } else { 4 };
    }
    let d = h * 360.0;
    if d < RED_END || d >= PINK_END {
        if s < PINK_MAX_S && v >= PINK_MIN_V { 6 } else { 8 }
    } else if d < ORANGE_END {
        if v < BROWN_MAX_V { 2 } else { 5 }
    } else if d < YELLOW_END {
        10
    } else if d < GREEN_END {
        3
    } else if d < BLUE_END {
        1
    } else if d < PURPLE_END {
        7
    } else {
        6
    }
}

pub fn colour(img: &Rgb) -> Vec<f64> {
    let hsv = img.hsv();
    let n = hsv.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for p in &hsv {
        c += (TAU * p[0]).cos();
        s += (TAU * p[0]).sin();
    }
    let hue_var = (1.0 - ((c / n).powi(2) + (s / n).powi(2)).sqrt()).clamp(0.0, 1.0);
    let sat: Vec<f64> = hsv.iter().map(|p| p[1]).collect();
    let val: Vec<f64> = hsv.iter().map(|p| p[2]).collect();
    let (sm, vm) = (mean(&sat), mean(&val));
    let mut out = vec![hue_var, sm, vm, pop_std(&sat), pop_std(&val)];
    out.push(0.69 * vm + 0.22 * sm);
    out.push(-0.31 * vm + 0.60 * sm);
    out.push(-0.76 * vm + 0.32 * sm);

    let rg: Vec<f64> = img.px.iter().map(|p| p[0] - p[1]).collect();
    let yb: Vec<f64> = img.px.iter().map(|p| 0.5 * (p[0] + p[1]) - p[2]).collect();
    let (srg, syb) = (pop_std(&rg), pop_std(&yb));
    let (mrg, myb) = (mean(&rg), mean(&yb));
    out.push((srg * srg + syb * syb).sqrt() + 0.3 * (mrg * mrg + myb * myb).sqrt());

    let mut names = [0.0; 11];
    for p in &hsv {
        names[colour_name_index(p[0], p[1], p[2])] += 1.0;
    }
    out.extend(names.iter().map(|c| c / n));

    let (w, h) = (img.w as isize, img.h as isize);
    let mut dark = 0.0;
    for y in 0..h {
        for x in 0..w {
            let mut m = f64::INFINITY;
            for yy in (y - 7).max(0)..=(y + 7).min(h - 1) {
                for xx in (x - 7).max(0)..=(x + 7).min(w - 1) {
                    let p = img.px[(yy * w + xx) as usize];
                    m = m.min(p[0]).min(p[1]).min(p[2]);
                }
            }
            dark += m;
        }
    }
    out.push(dark / n);

    let mut bins = [0.0; 16];
    for p in &hsv {
        bins[((p[0] * 16.0) as usize).min(15)] += p[1] * p[2];
    }
    out.push(bins.iter().copied().fold(0.0, f64::max) / n);
    out
}

pub fn block_bounds(w: usize, h: usize, grid: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut v = Vec::new();
    for by in 0..grid {
        for bx in 0..grid {
            v.push((bx * w / grid, (bx + 1) * w / grid, by * h / grid, (by + 1) * h / grid));
        }
    }
    v
}

fn at(p: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let x = x.clamp(0, w as isize - 1) as usize;
    let y = y.clamp(0, h as isize - 1) as usize;
    p[y * w + x]
}

fn quant(v: f64, levels: usize) -> usize {
    ((v * levels as f64) as usize).min(levels - 1)
}

pub fn entropy(gray: &[f64]) -> f64 {
    let mut hist = vec![0.0; 256];
    for g in gray {
        hist[(g * 255.0).round().clamp(0.0, 255.0) as usize] += 1.0;
    }
    let n = gray.len() as f64;
    let mut e = 0.0;
    for c in hist {
        if c > 0.0 {
            e -= c / n * (c / n).log2();
        }
    }
    e.max(0.0)
}

fn sharpness(gray: &[f64], w: usize, h: usize) -> [f64; 4] {
    let mut blocks = Vec::new();
    for (x0, x1, y0, y1) in block_bounds(w, h, 4) {
        let mut acc = 0.0;
        for y in y0..y1 {
            for x in x0..x1 {
                let (xi, yi) = (x as isize, y as isize);
                let c = at(gray, w, h, xi, yi);
                let l = at(gray, w, h, xi - 1, yi) + at(gray, w, h, xi + 1, yi) + at(gray, w, h, xi, yi - 1)
                    + at(gray, w, h, xi, yi + 1)
                    - 4.0 * c;
                acc += l.abs();
            }
        }
        blocks.push(acc / ((x1 - x0) * (y1 - y0)) as f64);
    }
    let m = mean(&blocks);
    let var = blocks.iter().map(|b| (b - m) * (b - m)).sum::<f64>() / blocks.len() as f64;
    [
        m,
        var,
        blocks.iter().copied().fold(f64::INFINITY, f64::min),
        blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    ]
}

fn haar(plane: &[f64], w: usize, h: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    let (mut cur, mut cw, mut ch) = (plane.to_vec(), w, h);
    for e in out.iter_mut() {
        let (nw, nh) = (cw / 2, ch / 2);
        let mut next = vec![0.0; nw * nh];
        let mut acc = 0.0;
        for y in 0..nh {
            for x in 0..nw {
                let a = cur[2 * y * cw + 2 * x];
                let b = cur[2 * y * cw + 2 * x + 1];
                let c = cur[(2 * y + 1) * cw + 2 * x];
                let d = cur[(2 * y + 1) * cw + 2 * x + 1];
                next[y * nw + x] = (a + b + c + d) / 4.0;
                let lh = (a - b + c - d) / 4.0;
                let hl = (a + b - c - d) / 4.0;
                let hh = (a - b - c + d) / 4.0;
                acc += lh.abs() + hl.abs() + hh.abs();
            }
        }
        *e = acc / (3 * nw * nh) as f64;
        cur = next;
        cw = nw;
        ch = nh;
    }
    out
}

fn window_mean(gray: &[f64], w: usize, h: usize, x: isize, y: isize, half: isize) -> f64 {
    let (x0, x1) = ((x - half).max(0), (x + half).min(w as isize));
    let (y0, y1) = ((y - half).max(0), (y + half).min(h as isize));
    let mut s = 0.0;
    for yy in y0..y1 {
        for xx in x0..x1 {
            s += gray[yy as usize * w + xx as usize];
        }
    }
    s / ((x1 - x0) * (y1 - y0)) as f64
}

fn coarseness(gray: &[f64], w: usize, h: usize) -> f64 {
    let avg: Vec<Vec<f64>> = (1..=5)
        .map(|k| {
            let half = 1isize << (k - 1);
            let mut a = Vec::with_capacity(w * h);
            for y in 0..h as isize {
                for x in 0..w as isize {
                    a.push(window_mean(gray, w, h, x, y, half));
                }
            }
            a
        })
        .collect();
    let mut total = 0.0;
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut best_k = 0;
            let mut best = f64::NEG_INFINITY;
            for k in 0..5 {
                let d = 1isize << k;
                let a = &avg[k];
                let eh = (at(a, w, h, x + d, y) - at(a, w, h, x - d, y)).abs();
                let ev = (at(a, w, h, x, y + d) - at(a, w, h, x, y - d)).abs();
                if eh.max(ev) > best + 1e-12 {
                    best = eh.max(ev);
                    best_k = k;
                }
            }
            total += 2f64.powi(best_k as i32 + 1);
        }
    }
    total / (w * h) as f64
}

fn contrast(gray: &[f64]) -> f64 {
    if gray.iter().all(|&g| g == gray[0]) {
        return 0.0;
    }
    let m = mean(gray);
    let n = gray.len() as f64;
    let var = gray.iter().map(|g| (g - m).powi(2)).sum::<f64>() / n;
    let m4 = gray.iter().map(|g| (g - m).powi(4)).sum::<f64>() / n;
    var.sqrt() / (m4 / (var * var)).powf(0.25)
}

fn directionality(gray: &[f64], w: usize, h: usize) -> f64 {
    let mut hist = [0.0; 16];
    let mut votes = 0.0;
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| at(gray, w, h, x + dx, y + dy);
            let dh = (p(1, -1) + p(1, 0) + p(1, 1)) - (p(-1, -1) + p(-1, 0) + p(-1, 1));
            let dv = (p(-1, 1) + p(0, 1) + p(1, 1)) - (p(-1, -1) + p(0, -1) + p(1, -1));
            if (dh.abs() + dv.abs()) / 2.0 < 12.0 / 255.0 {
                continue;
            }
            let t = dv.atan2(dh).rem_euclid(PI);
            hist[((t / PI * 16.0) as usize).min(15)] += 1.0;
            votes += 1.0;
        }
    }
    if votes == 0.0 {
        return 0.0;
    }
    let mut peak = 0;
    for b in 1..16 {
        if hist[b] > hist[peak] {
            peak = b;
        }
    }
    let mut spread = 0.0;
    for (b, c) in hist.iter().enumerate() {
        let raw = (b as f64 - peak as f64).abs() * PI / 16.0;
        let d = raw.min(PI - raw);
        spread += c / votes * d * d;
    }
    1.0 - spread / (PI / 2.0).powi(2)
}

fn glcm(plane: &[f64], w: usize, h: usize) -> [f64; 4] {
    const L: usize = 64;
    let q: Vec<usize> = plane.iter().map(|&v| quant(v, L)).collect();
    let mut ph = vec![vec![0.0; L]; L];
    let mut pv = vec![vec![0.0; L]; L];
    let (mut nh, mut nv) = (0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                let (a, b) = (q[y * w + x], q[y * w + x + 1]);
                ph[a][b] += 1.0;
                ph[b][a] += 1.0;
                nh += 2.0;
            }
            if y + 1 < h {
                let (a, b) = (q[y * w + x], q[(y + 1) * w + x]);
                pv[a][b] += 1.0;
                pv[b][a] += 1.0;
                nv += 2.0;
            }
        }
    }
    let p = |i: usize, j: usize| 0.5 * (ph[i][j] / nh + pv[i][j] / nv);
    let mut mu = 0.0;
    for i in 0..L {
        for j in 0..L {
            mu += i as f64 * p(i, j);
        }
    }
    let (mut con, mut var, mut cov, mut en, mut hom) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..L {
        for j in 0..L {
            let v = p(i, j);
            let d = i as f64 - j as f64;
            con += d * d * v;
            var += (i as f64 - mu).powi(2) * v;
            cov += (i as f64 - mu) * (j as f64 - mu) * v;
            en += v * v;
            hom += v / (1.0 + d * d);
        }
    }
    [con, if var > 0.0 { cov / var } else { 0.0 }, en, hom]
}

fn freq(k: usize, n: usize) -> f64 {
    if 2 * k < n { k as f64 / n as f64 } else { k as f64 / n as f64 - 1.0 }
}

fn log_gabor(fx: f64, fy: f64, centre: f64, theta: f64, orientations: usize) -> f64 {
    let f = fx.hypot(fy);
    if f == 0.0 {
        return 0.0;
    }
    let radial = (-(f / centre).ln().powi(2) / (2.0 * 0.55f64.ln().powi(2))).exp();
    let d = (fy.atan2(fx) - theta + PI).rem_euclid(TAU) - PI;
    let sigma = 0.6 * PI / orientations as f64;
    radial * (-(d * d) / (2.0 * sigma * sigma)).exp()
}

/// Separable naive DFT of a row-major complex field.
fn dft2(re: &mut [f64], im: &mut [f64], w: usize, h: usize, sign: f64) {
    let mut tmp_re = vec![0.0; w.max(h)];
    let mut tmp_im = vec![0.0; w.max(h)];
    for y in 0..h {
        for k in 0..w {
            let (mut sr, mut si) = (0.0, 0.0);
            for x in 0..w {
                let a = sign * TAU * ((k * x) % w) as f64 / w as f64;
                let (s, c) = a.sin_cos();
                sr += re[y * w + x] * c - im[y * w + x] * s;
                si += re[y * w + x] * s + im[y * w + x] * c;
            }
            tmp_re[k] = sr;
            tmp_im[k] = si;
        }
        re[y * w..(y + 1) * w].copy_from_slice(&tmp_re[..w]);
        im[y * w..(y + 1) * w].copy_from_slice(&tmp_im[..w]);
    }
    for x in 0..w {
        for k in 0..h {
            let (mut sr, mut si) = (0.0, 0.0);
            for y in 0..h {
                let a = sign * TAU * ((k * y) % h) as f64 / h as f64;
                let (s, c) = a.sin_cos();
                sr += re[y * w + x] * c - im[y * w + x] * s;
                si += re[y * w + x] * s + im[y * w + x] * c;
            }
            tmp_re[k] = sr;
            tmp_im[k] = si;
        }
        for y in 0..h {
            re[y * w + x] = tmp_re[y];
            im[y * w + x] = tmp_im[y];
        }
    }
}

/// Response magnitude maps, scale-major.
pub fn gabor_magnitudes(gray: &[f64], w: usize, h: usize, scales: &[f64]) -> Vec<Vec<f64>> {
    let m = mean(gray);
    let mut sre: Vec<f64> = gray.iter().map(|g| g - m).collect();
    let mut sim = vec![0.0; w * h];
    dft2(&mut sre, &mut sim, w, h, -1.0);
    let mut out = Vec::new();
    for &c in scales {
        for o in 0..8 {
            let theta = o as f64 * PI / 8.0;
            let mut re = vec![0.0; w * h];
            let mut im = vec![0.0; w * h];
            for ky in 0..h {
                for kx in 0..w {
                    let g = log_gabor(freq(kx, w), freq(ky, h), c, theta, 8);
                    re[ky * w + kx] = sre[ky * w + kx] * g;
                    im[ky * w + kx] = sim[ky * w + kx] * g;
                }
            }
            dft2(&mut re, &mut im, w, h, 1.0);
            let norm = (w * h) as f64;
            out.push(re.iter().zip(&im).map(|(a, b)| a.hypot(*b) / norm).collect());
        }
    }
    out
}

/// 56 texture values of an image already at the working size.
pub fn texture(img: &Rgb) -> Vec<f64> {
    let (w, h) = (img.w, img.h);
    let gray = img.gray();
    let hsv = img.hsv();
    let chans: Vec<Vec<f64>> = (0..3).map(|k| hsv.iter().map(|p| p[k]).collect()).collect();
    let mut out = vec![entropy(&gray)];
    out.extend(sharpness(&gray, w, h));
    let wav: Vec<[f64; 3]> = chans.iter().map(|c| haar(c, w, h)).collect();
    for x in &wav {
        out.extend(x);
    }
    for x in &wav {
        out.push(x[0] + x[1] + x[2]);
    }
    out.push(coarseness(&gray, w, h));
    out.push(contrast(&gray));
    out.push(directionality(&gray, w, h));
    for c in &chans {
        out.extend(glcm(c, w, h));
    }
    for m in gabor_magnitudes(&gray, w, h, &[0.25, 0.125, 0.0625]) {
        out.push(mean(&m));
    }
    out
}

fn l1(h: &mut [f64]) {
    let t: f64 = h.iter().sum();
    let n = h.len() as f64;
    for v in h.iter_mut() {
        *v = if t > 0.0 { *v / t } else { 1.0 / n };
    }
}

/// Uniform-pattern bin of each 8-bit code, by counting circular bit flips.
fn uniform_bins() -> Vec<usize> {
    let mut bins = vec![58; 256];
    let mut next = 0;
    for code in 0..256usize {
        let bit = |i: usize| (code >> (i % 8)) & 1;
        let flips = (0..8).filter(|&i| bit(i) != bit(i + 1)).count();
        if flips <= 2 {
            bins[code] = next;
            next += 1;
        }
    }
    bins
}

fn lbp_sample(gray: &[f64], w: usize, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    let g = |x: usize, y: usize| gray[y * w + x];
    let top = g(x0, y0) + fx * (g(x1, y0) - g(x0, y0));
    let bottom = g(x0, y1) + fx * (g(x1, y1) - g(x0, y1));
    top + fy * (bottom - top)
}

fn sift_descriptor(gray: &[f64], w: usize, h: usize, cx: usize, cy: usize) -> [f64; 128] {
    let mut d = [0.0; 128];
    for y in cy - 16..cy + 16 {
        for x in cx - 16..cx + 16 {
            let (xi, yi) = (x as isize, y as isize);
            let gx = at(gray, w, h, xi + 1, yi) - at(gray, w, h, xi - 1, yi);
            let gy = at(gray, w, h, xi, yi + 1) - at(gray, w, h, xi, yi - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let o = gy.atan2(gx).rem_euclid(TAU) / TAU * 8.0;
            let lo = o.floor() as usize % 8;
            let frac = o - o.floor();
            let cell = ((y + 16 - cy) / 8) * 4 + (x + 16 - cx) / 8;
            d[cell * 8 + lo] += mag * (1.0 - frac);
            d[cell * 8 + (lo + 1) % 8] += mag * frac;
        }
    }
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in d.iter_mut() {
            *v = (*v / norm).min(0.2);
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in d.iter_mut() {
            *v /= norm;
        }
    }
    d
}

/// 4016 local values of an image already at the working size.
pub fn local(img: &Rgb) -> Vec<f64> {
    let (w, h) = (img.w, img.h);
    let gray = img.gray();
    let hsv = img.hsv();
    let cells = block_bounds(w, h, 4);
    let mut out = Vec::new();

    for &(x0, x1, y0, y1) in &cells {
        let mut hist = [0.0; 32];
        for y in y0..y1 {
            for x in x0..x1 {
                let [hh, s, v] = hsv[y * w + x];
                let hb = ((hh * 8.0) as usize).min(7);
                hist[hb * 4 + if s >= 0.5 { 2 } else { 0 } + if v >= 0.5 { 1 } else { 0 }] += 1.0;
            }
        }
        l1(&mut hist);
        out.extend(hist);
    }

    let bins = uniform_bins();
    let offs: Vec<(f64, f64)> = (0..8)
        .map(|p| {
            let a = TAU * p as f64 / 8.0;
            let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
            (snap(2.0 * a.cos()), snap(-2.0 * a.sin()))
        })
        .collect();
    for &(x0, x1, y0, y1) in &cells {
        let mut hist = [0.0; 59];
        for y in y0.max(2)..y1.min(h - 2) {
            for x in x0.max(2)..x1.min(w - 2) {
                let c = gray[y * w + x];
                let mut code = 0;
                for (p, (dx, dy)) in offs.iter().enumerate() {
                    if lbp_sample(&gray, w, x as f64 + dx, y as f64 + dy) >= c {
                        code |= 1 << p;
                    }
                }
                hist[bins[code]] += 1.0;
            }
        }
        l1(&mut hist);
        out.extend(hist);
    }

    let mags = gabor_magnitudes(&gray, w, h, &[0.3, 0.15, 0.075, 0.0375]);
    for &(x0, x1, y0, y1) in &cells {
        for m in &mags {
            let mut acc = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    acc += m[y * w + x];
                }
            }
            out.push(acc / ((x1 - x0) * (y1 - y0)) as f64);
        }
    }

    let (cw, ch) = (w / 8 * 8, h / 8 * 8);
    let mut sums = vec![[0.0; 128]; 16];
    let mut cy = 16;
    while cy + 16 <= ch {
        let mut cx = 16;
        while cx + 16 <= cw {
            let d = sift_descriptor(&gray, w, h, cx, cy);
            let b = (cy / (h / 4)).min(3) * 4 + (cx / (w / 4)).min(3);
            for (s, v) in sums[b].iter_mut().zip(d) {
                *s += v;
            }
            cx += 8;
        }
        cy += 8;
    }
    for mut s in sums {
        l1(&mut s);
        out.extend(s);
    }
    out
}
