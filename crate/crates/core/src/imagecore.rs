//! Pixel rasters and the primitive operators composed by the foreground
//! pipeline: absolute differencing, grayscale conversion, binarization,
//! erosion and dilation.
//!
//! All rasters are row-major. Binary images store `0` (black) and `255`
//! (white) so they can be written out as ordinary grayscale images.

use crate::{Error, Exec, Result};

/// Value stored for foreground pixels in a [`BinaryImage`].
pub const WHITE: u8 = 255;
/// Value stored for background pixels in a [`BinaryImage`].
pub const BLACK: u8 = 0;

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

fn check_len(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::InvalidImage(format!(
            "{width}x{height}x{channels} raster needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

/// Rounds half away from zero. Used for every intensity average in the crate.
#[inline]
pub fn round_intensity(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// 8-bit RGB raster, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width, height, 3, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub(crate) fn ensure_same_dims(&self, other: &RgbImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                width: other.width,
                height: other.height,
            });
        }
        Ok(())
    }
}

/// 8-bit single channel raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width, height, 1, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    /// Replicates the intensity into all three channels.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }
}

/// Raster restricted to {[`BLACK`], [`WHITE`]}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width, height, 1, data.len())?;
        if let Some(v) = data.iter().find(|&&v| v != BLACK && v != WHITE) {
            return Err(Error::InvalidImage(format!(
                "binary image holds value {v}; only 0 and 255 are allowed"
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn black(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![BLACK; width * height],
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(if f(x, y) { WHITE } else { BLACK });
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_white(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == WHITE
    }

    /// Like [`BinaryImage::is_white`] but out-of-bounds coordinates read as black.
    #[inline]
    pub fn is_white_padded(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize] == WHITE
    }

    pub fn set(&mut self, x: usize, y: usize, white: bool) {
        self.data[y * self.width + x] = if white { WHITE } else { BLACK };
    }

    pub fn count_white(&self) -> usize {
        self.data.iter().filter(|&&v| v == WHITE).count()
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| WHITE - v).collect(),
        }
    }

    /// True when every white pixel of `self` is also white in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(&a, &b)| a == BLACK || b == WHITE)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.clone(),
        }
    }
}

/// Set of integer displacements probed around each pixel. Always contains
/// the origin `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn new(offsets: impl IntoIterator<Item = (i32, i32)>) -> Result<Self> {
        let mut offsets: Vec<_> = offsets.into_iter().collect();
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.is_empty() {
            return Err(Error::InvalidStructuringElement("no offsets".into()));
        }
        if offsets.binary_search(&(0, 0)).is_err() {
            return Err(Error::InvalidStructuringElement(
                "offsets must contain the origin (0, 0)".into(),
            ));
        }
        Ok(Self { offsets })
    }

    /// Full `size`×`size` square centred on the origin. `size` must be odd.
    pub fn square(size: usize) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidStructuringElement(format!(
                "square size must be odd and positive, got {size}"
            )));
        }
        let r = (size / 2) as i32;
        Self::new((-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))))
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    /// Mirror through the origin.
    pub fn reflect(&self) -> Self {
        Self::new(self.offsets.iter().map(|&(dx, dy)| (-dx, -dy))).expect("reflection of a valid element is valid")
    }

    /// Chebyshev radius: the largest |dx| or |dy|.
    pub fn radius(&self) -> usize {
        self.offsets
            .iter()
            .map(|&(dx, dy)| dx.unsigned_abs().max(dy.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3 is odd")
    }
}

pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| round_intensity(0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64))
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Heaviside threshold: white where `pixel >= threshold`.
pub fn binarize(img: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        data: img
            .data
            .iter()
            .map(|&v| if v >= threshold { WHITE } else { BLACK })
            .collect(),
    }
}

/// Per-channel `|a - b|`.
pub fn abs_diff(a: &RgbImage, b: &RgbImage) -> Result<RgbImage> {
    a.ensure_same_dims(b)?;
    Ok(RgbImage {
        width: a.width,
        height: a.height,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| x.abs_diff(y)).collect(),
    })
}

pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode_with(img, se, Exec::default())
}

/// Pixel `z` is white iff every offset of `se` translated by `z` lands on
/// a white pixel. Outside the raster counts as black.
pub fn erode_with(img: &BinaryImage, se: &StructuringElement, exec: Exec) -> BinaryImage {
    let offsets = se.offsets();
    probe(img, exec, |x, y| {
        offsets
            .iter()
            .all(|&(dx, dy)| img.is_white_padded(x + dx as i64, y + dy as i64))
    })
}

pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate_with(img, se, Exec::default())
}

/// Pixel `z` is white iff the reflected element translated by `z` hits at
/// least one white pixel.
pub fn dilate_with(img: &BinaryImage, se: &StructuringElement, exec: Exec) -> BinaryImage {
    let offsets = se.offsets();
    probe(img, exec, |x, y| {
        offsets
            .iter()
            .any(|&(dx, dy)| img.is_white_padded(x - dx as i64, y - dy as i64))
    })
}

/// Erosion followed by dilation.
pub fn morph_open(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    morph_open_with(img, se, Exec::default())
}

pub fn morph_open_with(img: &BinaryImage, se: &StructuringElement, exec: Exec) -> BinaryImage {
    dilate_with(&erode_with(img, se, exec), se, exec)
}

fn probe<F>(img: &BinaryImage, exec: Exec, hit: F) -> BinaryImage
where
    F: Fn(i64, i64) -> bool + Sync + Send,
{
    let (w, h) = (img.width, img.height);
    let mut data = vec![BLACK; w * h];
    exec.for_each_chunk_mut(&mut data, w, |y, row| {
        for (x, px) in row.iter_mut().enumerate() {
            if hit(x as i64, y as i64) {
                *px = WHITE;
            }
        }
    });
    BinaryImage {
        width: w,
        height: h,
        data,
    }
}
