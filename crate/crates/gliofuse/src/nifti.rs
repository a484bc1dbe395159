//! NIfTI-1 parsing and minimal writing.
//!
//! Reads the 348-byte header in either byte order, honors `dim`, `pixdim`,
//! `datatype`, `vox_offset` and `scl_slope`/`scl_inter`, and auto-detects
//! gzip wrapping. Orientation matrices (qform/sform) are ignored: the
//! co-registered volumes this pipeline consumes do not need them.

use std::io::{Read, Write};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::volume::Volume;

pub const HEADER_SIZE: usize = 348;
/// Smallest well-formed single-file volume: header + extension pad.
pub const MIN_FILE_SIZE: usize = 352;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

/// The header fields this pipeline honors.
#[derive(Debug, Clone)]
pub struct NiftiHeader {
    pub magic: [u8; 4],
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub endianness: Endianness,
}

const MAGIC_SINGLE: &[u8; 4] = b"n+1\0";
const MAGIC_PAIR: &[u8; 4] = b"ni1\0";

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_INT32: i16 = 8;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;
const DT_UINT16: i16 = 512;

fn is_gzip(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B
}

fn gunzip(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    GzDecoder::new(bytes).read_to_end(&mut out)?;
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    endian: Endianness,
}

impl<'a> Reader<'a> {
    fn i16_at(&self, off: usize) -> i16 {
        let b = [self.bytes[off], self.bytes[off + 1]];
        match self.endian {
            Endianness::Little => i16::from_le_bytes(b),
            Endianness::Big => i16::from_be_bytes(b),
        }
    }

    fn i32_at(&self, off: usize) -> i32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        match self.endian {
            Endianness::Little => i32::from_le_bytes(b),
            Endianness::Big => i32::from_be_bytes(b),
        }
    }

    fn f32_at(&self, off: usize) -> f32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        match self.endian {
            Endianness::Little => f32::from_le_bytes(b),
            Endianness::Big => f32::from_be_bytes(b),
        }
    }

    fn f64_at(&self, off: usize) -> f64 {
        let b: [u8; 8] = self.bytes[off..off + 8].try_into().unwrap();
        match self.endian {
            Endianness::Little => f64::from_le_bytes(b),
            Endianness::Big => f64::from_be_bytes(b),
        }
    }

    fn u16_at(&self, off: usize) -> u16 {
        self.i16_at(off) as u16
    }
}

/// Parses the 348-byte header, auto-detecting byte order from sizeof_hdr.
pub fn parse_header(bytes: &[u8]) -> Result<NiftiHeader> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::TruncatedFile {
            needed: HEADER_SIZE,
            got: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[344..348].try_into().unwrap();
    if &magic != MAGIC_SINGLE && &magic != MAGIC_PAIR {
        return Err(Error::BadMagic(magic));
    }
    let endian = if i32::from_le_bytes(bytes[0..4].try_into().unwrap()) == HEADER_SIZE as i32 {
        Endianness::Little
    } else if i32::from_be_bytes(bytes[0..4].try_into().unwrap()) == HEADER_SIZE as i32 {
        Endianness::Big
    } else {
        return Err(Error::BadMagic(magic));
    };
    let r = Reader { bytes, endian };
    let mut dim = [0i16; 8];
    for (i, d) in dim.iter_mut().enumerate() {
        *d = r.i16_at(40 + 2 * i);
    }
    if !(1..=7).contains(&dim[0]) {
        return Err(Error::DimOverflow(dim[0].max(0) as usize));
    }
    let mut pixdim = [0.0f32; 8];
    for (i, p) in pixdim.iter_mut().enumerate() {
        *p = r.f32_at(76 + 4 * i);
    }
    Ok(NiftiHeader {
        magic,
        dim,
        datatype: r.i16_at(70),
        bitpix: r.i16_at(72),
        pixdim,
        vox_offset: r.f32_at(108),
        scl_slope: r.f32_at(112),
        scl_inter: r.f32_at(116),
        endianness: endian,
    })
}

/// Parses a NIfTI-1 byte stream (optionally gzipped) into a [`Volume`].
///
/// Accepts uint8, int16, uint16, int32, float32 and float64 payloads and
/// converts to f64, applying `scl_slope`/`scl_inter` when `scl_slope != 0`.
/// Trailing singleton dimensions are squeezed; anything still above rank 3
/// is rejected.
pub fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    let owned;
    let bytes = if is_gzip(bytes) {
        owned = gunzip(bytes)?;
        &owned[..]
    } else {
        bytes
    };
    if bytes.len() < MIN_FILE_SIZE {
        return Err(Error::TruncatedFile {
            needed: MIN_FILE_SIZE,
            got: bytes.len(),
        });
    }
    let hdr = parse_header(bytes)?;

    let rank = hdr.dim[0] as usize;
    let mut shape: Vec<usize> = (1..=rank).map(|i| hdr.dim[i].max(0) as usize).collect();
    while shape.len() > 1 && shape.last() == Some(&1) {
        shape.pop();
    }
    if shape.len() > 3 {
        return Err(Error::DimOverflow(shape.len()));
    }
    if shape.contains(&0) {
        return Err(Error::EmptyVolume);
    }
    let nx = shape.first().copied().unwrap_or(1);
    let ny = shape.get(1).copied().unwrap_or(1);
    let nz = shape.get(2).copied().unwrap_or(1);
    let n = nx * ny * nz;

    let spacing = |i: usize| {
        let p = hdr.pixdim[i] as f64;
        if p > 0.0 {
            p
        } else {
            1.0
        }
    };
    let spacing = (spacing(1), spacing(2), spacing(3));

    let bytes_per = match hdr.datatype {
        DT_UINT8 => 1,
        DT_INT16 | DT_UINT16 => 2,
        DT_INT32 | DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        other => return Err(Error::UnsupportedDatatype(other)),
    };
    let offset = (hdr.vox_offset.max(0.0) as usize).max(HEADER_SIZE);
    let needed = offset + n * bytes_per;
    if bytes.len() < needed {
        return Err(Error::TruncatedFile {
            needed,
            got: bytes.len(),
        });
    }
    let r = Reader {
        bytes,
        endian: hdr.endianness,
    };
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let off = offset + i * bytes_per;
        let raw = match hdr.datatype {
            DT_UINT8 => bytes[off] as f64,
            DT_INT16 => r.i16_at(off) as f64,
            DT_UINT16 => r.u16_at(off) as f64,
            DT_INT32 => r.i32_at(off) as f64,
            DT_FLOAT32 => r.f32_at(off) as f64,
            DT_FLOAT64 => r.f64_at(off),
            _ => unreachable!(),
        };
        let v = if hdr.scl_slope != 0.0 {
            hdr.scl_slope as f64 * raw + hdr.scl_inter as f64
        } else {
            raw
        };
        data.push(v);
    }
    Volume::new((nx, ny, nz), spacing, data)
}

/// Payload type for [`write_nifti`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteDatatype {
    /// Lossless f64 payload.
    Float64,
    /// uint8 payload for label masks; values are rounded and clamped to 0..=255.
    Uint8,
}

fn put_i16(buf: &mut [u8], off: usize, v: i16, endian: Endianness) {
    let b = match endian {
        Endianness::Little => v.to_le_bytes(),
        Endianness::Big => v.to_be_bytes(),
    };
    buf[off..off + 2].copy_from_slice(&b);
}

fn put_i32(buf: &mut [u8], off: usize, v: i32, endian: Endianness) {
    let b = match endian {
        Endianness::Little => v.to_le_bytes(),
        Endianness::Big => v.to_be_bytes(),
    };
    buf[off..off + 4].copy_from_slice(&b);
}

fn put_f32(buf: &mut [u8], off: usize, v: f32, endian: Endianness) {
    let b = match endian {
        Endianness::Little => v.to_le_bytes(),
        Endianness::Big => v.to_be_bytes(),
    };
    buf[off..off + 4].copy_from_slice(&b);
}

/// Serializes a volume as a single-file NIfTI-1 stream ("n+1" magic,
/// data at offset 352). Optionally gzip-wraps the result.
pub fn write_nifti(
    v: &Volume,
    datatype: WriteDatatype,
    endian: Endianness,
    gzip: bool,
) -> Result<Vec<u8>> {
    let (nx, ny, nz) = v.dims();
    let n = nx * ny * nz;
    let bytes_per = match datatype {
        WriteDatatype::Float64 => 8,
        WriteDatatype::Uint8 => 1,
    };
    let mut buf = vec![0u8; MIN_FILE_SIZE + n * bytes_per];
    put_i32(&mut buf, 0, HEADER_SIZE as i32, endian);
    buf[38] = b'r'; // regular
    put_i16(&mut buf, 40, 3, endian);
    put_i16(&mut buf, 42, nx as i16, endian);
    put_i16(&mut buf, 44, ny as i16, endian);
    put_i16(&mut buf, 46, nz as i16, endian);
    for i in 4..8 {
        put_i16(&mut buf, 40 + 2 * i, 1, endian);
    }
    let (dt, bits) = match datatype {
        WriteDatatype::Float64 => (DT_FLOAT64, 64),
        WriteDatatype::Uint8 => (DT_UINT8, 8),
    };
    put_i16(&mut buf, 70, dt, endian);
    put_i16(&mut buf, 72, bits, endian);
    let (sx, sy, sz) = v.spacing();
    put_f32(&mut buf, 76, 1.0, endian); // qfac
    put_f32(&mut buf, 80, sx as f32, endian);
    put_f32(&mut buf, 84, sy as f32, endian);
    put_f32(&mut buf, 88, sz as f32, endian);
    put_f32(&mut buf, 108, MIN_FILE_SIZE as f32, endian); // vox_offset
    put_f32(&mut buf, 112, 0.0, endian); // scl_slope unset
    buf[344..348].copy_from_slice(MAGIC_SINGLE);

    let mut off = MIN_FILE_SIZE;
    for &x in v.data() {
        match datatype {
            WriteDatatype::Float64 => {
                let b = match endian {
                    Endianness::Little => x.to_le_bytes(),
                    Endianness::Big => x.to_be_bytes(),
                };
                buf[off..off + 8].copy_from_slice(&b);
                off += 8;
            }
            WriteDatatype::Uint8 => {
                buf[off] = x.round().clamp(0.0, 255.0) as u8;
                off += 1;
            }
        }
    }

    if gzip {
        let mut enc = GzEncoder::new(Vec::new(), Compression::fast());
        enc.write_all(&buf)?;
        Ok(enc.finish()?)
    } else {
        Ok(buf)
    }
}

/// Reads a `.nii` / `.nii.gz` file from disk.
pub fn read_nifti_file(path: &std::path::Path) -> Result<Volume> {
    let bytes = std::fs::read(path)?;
    parse_nifti(&bytes)
}

/// Writes a volume to disk, gzipping when the path ends in `.gz`.
pub fn write_nifti_file(
    path: &std::path::Path,
    v: &Volume,
    datatype: WriteDatatype,
) -> Result<()> {
    let gz = path.extension().map(|e| e == "gz").unwrap_or(false);
    let bytes = write_nifti(v, datatype, Endianness::Little, gz)?;
    std::fs::write(path, bytes)?;
    Ok(())
}
