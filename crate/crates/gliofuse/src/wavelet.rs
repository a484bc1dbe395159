//! Single-level 2-D orthonormal wavelet analysis/synthesis per axial slice,
//! mean-value fusion of the four modality subbands, and grayscale rescaling
//! of the reconstructed fused volume.
//!
//! The transform is the separable filter-bank form: filter + downsample rows
//! with the low- and high-pass taps, then columns, giving the approximation
//! (ad) and the horizontal/vertical/diagonal detail bands (hd, vd, dd).

use crate::error::{Error, Result};
use crate::volume::{SubjectCase, Volume};

/// Two-channel orthonormal filter pair.
#[derive(Debug, Clone)]
pub struct WaveletFilter {
    pub low_pass: Vec<f64>,
    pub high_pass: Vec<f64>,
    pub name: &'static str,
}

impl WaveletFilter {
    /// The 2-tap Daubechies (Haar) pair: l = [1/sqrt2, 1/sqrt2],
    /// h = [1/sqrt2, -1/sqrt2].
    pub fn db1() -> WaveletFilter {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        WaveletFilter {
            low_pass: vec![s, s],
            high_pass: vec![s, -s],
            name: "db1",
        }
    }
}

/// The four single-level subband planes of one slice.
///
/// All four grids share dims (ceil(nx/2), ceil(ny/2)); `source_dims` records
/// the pre-padding slice size so synthesis can truncate edge replication.
#[derive(Debug, Clone)]
pub struct Subbands {
    pub ad: Vec<f64>,
    pub hd: Vec<f64>,
    pub vd: Vec<f64>,
    pub dd: Vec<f64>,
    /// Band grid dims (width, height).
    pub band_dims: (usize, usize),
    /// Original slice dims (width, height) before any odd-size padding.
    pub source_dims: (usize, usize),
}

impl Subbands {
    pub fn zeros(band_dims: (usize, usize), source_dims: (usize, usize)) -> Subbands {
        let n = band_dims.0 * band_dims.1;
        Subbands {
            ad: vec![0.0; n],
            hd: vec![0.0; n],
            vd: vec![0.0; n],
            dd: vec![0.0; n],
            band_dims,
            source_dims,
        }
    }

    pub fn bands(&self) -> [&Vec<f64>; 4] {
        [&self.ad, &self.hd, &self.vd, &self.dd]
    }

    /// Sum of squared coefficients over all four bands.
    pub fn energy(&self) -> f64 {
        self.bands()
            .iter()
            .map(|b| b.iter().map(|c| c * c).sum::<f64>())
            .sum()
    }
}

/// Detail-band combination rule for [`fuse_subbands`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetailFusion {
    /// Coefficient-wise arithmetic mean in every band (default).
    Mean,
    /// Mean for the approximation band, largest-magnitude coefficient for
    /// the detail bands.
    MaxAbs,
}

// db1 analysis along one axis: a[k] = (x[2k] + x[2k+1])/sqrt2,
// d[k] = (x[2k] - x[2k+1])/sqrt2. Odd lengths replicate the last sample.
fn analyze_1d(x: &[f64], filter: &WaveletFilter, a: &mut [f64], d: &mut [f64]) {
    let l = &filter.low_pass;
    let h = &filter.high_pass;
    let n = x.len();
    let half = n.div_ceil(2);
    for k in 0..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for (m, (&lm, &hm)) in l.iter().zip(h.iter()).enumerate() {
            let idx = (2 * k + m).min(n - 1); // edge replication
            sa += lm * x[idx];
            sd += hm * x[idx];
        }
        a[k] = sa;
        d[k] = sd;
    }
}

// Inverse of analyze_1d for the 2-tap orthonormal pair.
fn synth_1d(a: &[f64], d: &[f64], filter: &WaveletFilter, out: &mut [f64]) {
    let l = &filter.low_pass;
    let h = &filter.high_pass;
    let n = out.len();
    for k in 0..a.len() {
        for m in 0..l.len() {
            let idx = 2 * k + m;
            if idx < n {
                out[idx] = l[m] * a[k] + h[m] * d[k];
            }
        }
    }
}

/// Single-level 2-D analysis of one slice (row-major, `dims` = (nx, ny)).
///
/// Odd dimensions are handled by edge replication and recorded in
/// `source_dims`; [`idwt2_level1`] truncates back.
pub fn dwt2_level1(slice: &[f64], dims: (usize, usize), filter: &WaveletFilter) -> Result<Subbands> {
    let (nx, ny) = dims;
    if nx == 0 || ny == 0 || slice.len() != nx * ny {
        return Err(Error::EmptySlice);
    }
    let hx = nx.div_ceil(2);
    let hy = ny.div_ceil(2);

    // pass 1: rows (along x) -> low half and high half
    let mut low = vec![0.0; hx * ny];
    let mut high = vec![0.0; hx * ny];
    let mut a = vec![0.0; hx];
    let mut d = vec![0.0; hx];
    for y in 0..ny {
        analyze_1d(&slice[y * nx..(y + 1) * nx], filter, &mut a, &mut d);
        low[y * hx..(y + 1) * hx].copy_from_slice(&a);
        high[y * hx..(y + 1) * hx].copy_from_slice(&d);
    }

    // pass 2: columns (along y) of each half
    let mut sb = Subbands::zeros((hx, hy), (nx, ny));
    let mut col = vec![0.0; ny];
    let mut ca = vec![0.0; hy];
    let mut cd = vec![0.0; hy];
    for x in 0..hx {
        for y in 0..ny {
            col[y] = low[y * hx + x];
        }
        analyze_1d(&col, filter, &mut ca, &mut cd);
        for k in 0..hy {
            sb.ad[k * hx + x] = ca[k];
            sb.hd[k * hx + x] = cd[k];
        }
        for y in 0..ny {
            col[y] = high[y * hx + x];
        }
        analyze_1d(&col, filter, &mut ca, &mut cd);
        for k in 0..hy {
            sb.vd[k * hx + x] = ca[k];
            sb.dd[k * hx + x] = cd[k];
        }
    }
    Ok(sb)
}

/// Exact inverse of [`dwt2_level1`]; returns the slice at `source_dims`.
pub fn idwt2_level1(sb: &Subbands, filter: &WaveletFilter) -> Result<Vec<f64>> {
    let (hx, hy) = sb.band_dims;
    let n = hx * hy;
    for band in sb.bands() {
        if band.len() != n {
            return Err(Error::DimMismatch(format!(
                "subband length {} != {}x{}",
                band.len(),
                hx,
                hy
            )));
        }
    }
    let (nx, ny) = sb.source_dims;
    let px = 2 * hx; // padded dims
    let py = 2 * hy;

    // invert pass 2: columns
    let mut low = vec![0.0; hx * py];
    let mut high = vec![0.0; hx * py];
    let mut ca = vec![0.0; hy];
    let mut cd = vec![0.0; hy];
    let mut col = vec![0.0; py];
    for x in 0..hx {
        for k in 0..hy {
            ca[k] = sb.ad[k * hx + x];
            cd[k] = sb.hd[k * hx + x];
        }
        synth_1d(&ca, &cd, filter, &mut col);
        for y in 0..py {
            low[y * hx + x] = col[y];
        }
        for k in 0..hy {
            ca[k] = sb.vd[k * hx + x];
            cd[k] = sb.dd[k * hx + x];
        }
        synth_1d(&ca, &cd, filter, &mut col);
        for y in 0..py {
            high[y * hx + x] = col[y];
        }
    }

    // invert pass 1: rows, truncating replication padding
    let mut out = vec![0.0; nx * ny];
    let mut row = vec![0.0; px];
    let mut ra = vec![0.0; hx];
    let mut rd = vec![0.0; hx];
    for y in 0..ny {
        ra.copy_from_slice(&low[y * hx..(y + 1) * hx]);
        rd.copy_from_slice(&high[y * hx..(y + 1) * hx]);
        synth_1d(&ra, &rd, filter, &mut row);
        out[y * nx..(y + 1) * nx].copy_from_slice(&row[..nx]);
    }
    Ok(out)
}

/// Coefficient-wise fusion of exactly four subband sets (one per modality).
pub fn fuse_subbands(parts: &[Subbands], rule: DetailFusion) -> Result<Subbands> {
    if parts.len() != 4 {
        return Err(Error::WrongArity(parts.len()));
    }
    let dims = parts[0].band_dims;
    let src = parts[0].source_dims;
    for p in parts {
        if p.band_dims != dims || p.source_dims != src {
            return Err(Error::DimMismatch(format!(
                "subband dims {:?} != {:?}",
                p.band_dims, dims
            )));
        }
    }
    let n = dims.0 * dims.1;
    let mut fused = Subbands::zeros(dims, src);
    for i in 0..n {
        fused.ad[i] = parts.iter().map(|p| p.ad[i]).sum::<f64>() / 4.0;
    }
    let detail =
        |get: fn(&Subbands) -> &Vec<f64>, out: &mut Vec<f64>| {
            for i in 0..n {
                out[i] = match rule {
                    DetailFusion::Mean => parts.iter().map(|p| get(p)[i]).sum::<f64>() / 4.0,
                    DetailFusion::MaxAbs => parts
                        .iter()
                        .map(|p| get(p)[i])
                        .fold(0.0f64, |best, c| if c.abs() > best.abs() { c } else { best }),
                };
            }
        };
    detail(|p| &p.hd, &mut fused.hd);
    detail(|p| &p.vd, &mut fused.vd);
    detail(|p| &p.dd, &mut fused.dd);
    Ok(fused)
}

/// Affine map of the whole-volume value range onto [0, 255], kept as reals.
/// A constant volume maps to all-0.
pub fn rescale_grayscale(v: &Volume) -> Result<Volume> {
    let (lo, hi) = v.min_max();
    let range = hi - lo;
    let data = v
        .data()
        .iter()
        .map(|&x| if range == 0.0 { 0.0 } else { (x - lo) / range * 255.0 })
        .collect();
    Volume::new(v.dims(), v.spacing(), data)
}

/// Fusion configuration: decomposition depth and detail rule.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FusionConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_detail_fusion")]
    pub detail_fusion: DetailFusion,
}

fn default_levels() -> usize {
    1
}

fn default_detail_fusion() -> DetailFusion {
    DetailFusion::Mean
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            levels: 1,
            detail_fusion: DetailFusion::Mean,
        }
    }
}

// Fuses one slice position across the four modalities, recursing on the
// approximation band when levels > 1.
fn fuse_slices(
    slices: &[Vec<f64>; 4],
    dims: (usize, usize),
    filter: &WaveletFilter,
    cfg: &FusionConfig,
    level: usize,
) -> Result<Vec<f64>> {
    let parts: Vec<Subbands> = slices
        .iter()
        .map(|s| dwt2_level1(s, dims, filter))
        .collect::<Result<_>>()?;
    let mut fused = fuse_subbands(&parts, cfg.detail_fusion)?;
    if level + 1 < cfg.levels && fused.band_dims.0 >= 2 && fused.band_dims.1 >= 2 {
        let sub: [Vec<f64>; 4] = [
            parts[0].ad.clone(),
            parts[1].ad.clone(),
            parts[2].ad.clone(),
            parts[3].ad.clone(),
        ];
        fused.ad = fuse_slices(&sub, fused.band_dims, filter, cfg, level + 1)?;
    }
    idwt2_level1(&fused, filter)
}

/// Runs the per-slice fuse path over a whole subject: analyze each modality,
/// fuse the subbands, synthesize, reassemble slices, then rescale the volume
/// onto the 0-255 gray range.
pub fn fuse_subject(case: &SubjectCase, cfg: &FusionConfig) -> Result<Volume> {
    let (nx, ny, nz) = case.flair.dims();
    let filter = WaveletFilter::db1();
    let mut out = Volume::zeros((nx, ny, nz)).with_spacing(case.flair.spacing());
    for z in 0..nz {
        let slices = [
            case.flair.slice(z),
            case.t1.slice(z),
            case.t1ce.slice(z),
            case.t2.slice(z),
        ];
        let fused = fuse_slices(&slices, (nx, ny), &filter, cfg, 0)?;
        out.set_slice(z, &fused);
    }
    rescale_grayscale(&out)
}

/// Debug dump: the four bands as flat little-endian f64 grids plus a JSON
/// sidecar naming dims and band order.
pub fn dump_subbands(dir: &std::path::Path, sb: &Subbands) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, band) in [("ad", &sb.ad), ("hd", &sb.hd), ("vd", &sb.vd), ("dd", &sb.dd)] {
        let mut bytes = Vec::with_capacity(band.len() * 8);
        for &c in band {
            bytes.extend_from_slice(&c.to_le_bytes());
        }
        std::fs::write(dir.join(format!("{name}.bin")), bytes)?;
    }
    let sidecar = serde_json::json!({
        "band_dims": [sb.band_dims.0, sb.band_dims.1],
        "source_dims": [sb.source_dims.0, sb.source_dims.1],
        "bands": ["ad", "hd", "vd", "dd"],
        "dtype": "f64-le",
    });
    std::fs::write(dir.join("subbands.json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
