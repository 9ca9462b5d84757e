//! Baseline sequential JPEG (JFIF, 4:4:4) encoder and decoder.
//!
//! The codec lives in-tree so that a JPEG round trip produces the same
//! bytes on every platform. The encoder writes the Annex K quantization
//! tables scaled by the IJG quality formula and the Annex K Huffman tables.
//! The decoder accepts baseline files with one or three components at
//! 1x1 sampling, which covers everything the encoder emits.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::imaging::{quantize, Frame};

const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21,
    28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61,
    54, 47, 55, 62, 63,
];

/// Luminance quantization table in natural (row-major) order.
const LUMA_QT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55, 14, 13, 16, 24, 40, 57, 69, 56, 14, 17, 22, 29,
    51, 87, 80, 62, 18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120,
    101, 72, 92, 95, 98, 112, 100, 103, 99,
];

const CHROMA_QT: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

const DC_LUMA_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const DC_CHROMA_BITS: [u8; 16] = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
const DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const AC_LUMA_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const AC_LUMA_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14,
    0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09,
    0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a,
    0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65,
    0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88,
    0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9,
    0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
    0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea,
    0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

const AC_CHROMA_BITS: [u8; 16] = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77];
const AC_CHROMA_VALUES: [u8; 162] = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32,
    0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16,
    0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39,
    0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86,
    0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
    0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8,
    0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9,
    0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

/// Quantization table for `quality` in `[1, 100]`, natural order.
pub fn scaled_table(base: &[u16; 64], quality: u8) -> Result<[u16; 64]> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidParameter(format!("jpeg quality {quality} outside [1, 100]")));
    }
    let q = u32::from(quality);
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((u32::from(b) * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(out)
}

pub fn luma_table(quality: u8) -> Result<[u16; 64]> {
    scaled_table(&LUMA_QT, quality)
}

pub fn chroma_table(quality: u8) -> Result<[u16; 64]> {
    scaled_table(&CHROMA_QT, quality)
}

/// `COS[x][u] = C(u)/2 * cos((2x + 1) u pi / 16)`: the 8-point orthonormal basis.
fn cos_table() -> &'static [[f64; 8]; 8] {
    static TABLE: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0.0; 8]; 8];
        for (x, row) in t.iter_mut().enumerate() {
            for (u, v) in row.iter_mut().enumerate() {
                let c = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                *v = c / 2.0 * (((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        t
    })
}

fn fdct8x8(block: &[f64; 64]) -> [f64; 64] {
    let t = cos_table();
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for u in 0..8 {
            tmp[y * 8 + u] = (0..8).map(|x| block[y * 8 + x] * t[x][u]).sum();
        }
    }
    let mut out = [0.0; 64];
    for v in 0..8 {
        for u in 0..8 {
            out[v * 8 + u] = (0..8).map(|y| tmp[y * 8 + u] * t[y][v]).sum();
        }
    }
    out
}

fn idct8x8(coef: &[f64; 64]) -> [f64; 64] {
    let t = cos_table();
    let mut tmp = [0.0; 64];
    for v in 0..8 {
        for x in 0..8 {
            tmp[v * 8 + x] = (0..8).map(|u| coef[v * 8 + u] * t[x][u]).sum();
        }
    }
    let mut out = [0.0; 64];
    for y in 0..8 {
        for x in 0..8 {
            out[y * 8 + x] = (0..8).map(|v| tmp[v * 8 + x] * t[y][v]).sum();
        }
    }
    out
}

fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> [f64; 3] {
    [
        0.299 * r + 0.587 * g + 0.114 * b,
        -0.168_735_891_6 * r - 0.331_264_108_4 * g + 0.5 * b + 128.0,
        0.5 * r - 0.418_687_589_2 * g - 0.081_312_410_8 * b + 128.0,
    ]
}

fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> [f64; 3] {
    let (cb, cr) = (cb - 128.0, cr - 128.0);
    [y + 1.402 * cr, y - 0.344_136_286_2 * cb - 0.714_136_286_2 * cr, y + 1.772 * cb]
}

/// Huffman code table for encoding: `(code, length)` per symbol.
struct EncodeTable {
    codes: [(u16, u8); 256],
}

impl EncodeTable {
    fn new(bits: &[u8; 16], values: &[u8]) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0;
        for (len_minus_one, &count) in bits.iter().enumerate() {
            for _ in 0..count {
                codes[values[k] as usize] = (code, len_minus_one as u8 + 1);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        EncodeTable { codes }
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        BitWriter { out, acc: 0, nbits: 0 }
    }

    fn put(&mut self, bits: u16, len: u8) {
        for i in (0..len).rev() {
            self.acc = (self.acc << 1) | u32::from((bits >> i) & 1);
            self.nbits += 1;
            if self.nbits == 8 {
                self.emit(self.acc as u8);
                self.acc = 0;
                self.nbits = 0;
            }
        }
    }

    fn emit(&mut self, byte: u8) {
        self.out.push(byte);
        if byte == 0xFF {
            self.out.push(0x00);
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.put((1u16 << pad) - 1, pad as u8);
        }
        self.out
    }
}

/// Magnitude category and the raw bits that follow it.
fn magnitude_bits(v: i32) -> (u8, u16) {
    if v == 0 {
        return (0, 0);
    }
    let size = 32 - v.unsigned_abs().leading_zeros();
    let bits = if v < 0 { v + (1 << size) - 1 } else { v };
    (size as u8, bits as u16)
}

fn write_segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

/// Encodes an RGB frame as a baseline 4:4:4 JFIF stream.
pub fn encode(frame: &Frame, quality: u8) -> Result<Vec<u8>> {
    let tables = [luma_table(quality)?, chroma_table(quality)?];
    let (w, h) = (frame.width(), frame.height());
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(Error::Jpeg(format!("frame {w}x{h} exceeds JPEG dimension limits")));
    }

    let mut out = vec![0xFF, 0xD8];
    write_segment(&mut out, 0xE0, &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0]);
    for (id, table) in tables.iter().enumerate() {
        let mut payload = vec![id as u8];
        payload.extend(ZIGZAG.iter().map(|&n| table[n] as u8));
        write_segment(&mut out, 0xDB, &payload);
    }
    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.extend_from_slice(&[3, 1, 0x11, 0, 2, 0x11, 1, 3, 0x11, 1]);
    write_segment(&mut out, 0xC0, &sof);
    for (class_id, bits, values) in [
        (0x00, &DC_LUMA_BITS, &DC_VALUES[..]),
        (0x10, &AC_LUMA_BITS, &AC_LUMA_VALUES[..]),
        (0x01, &DC_CHROMA_BITS, &DC_VALUES[..]),
        (0x11, &AC_CHROMA_BITS, &AC_CHROMA_VALUES[..]),
    ] {
        let mut payload = vec![class_id];
        payload.extend_from_slice(bits);
        payload.extend_from_slice(values);
        write_segment(&mut out, 0xC4, &payload);
    }
    write_segment(&mut out, 0xDA, &[3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0]);

    let dc = [EncodeTable::new(&DC_LUMA_BITS, &DC_VALUES), EncodeTable::new(&DC_CHROMA_BITS, &DC_VALUES)];
    let ac = [EncodeTable::new(&AC_LUMA_BITS, &AC_LUMA_VALUES), EncodeTable::new(&AC_CHROMA_BITS, &AC_CHROMA_VALUES)];

    // colour conversion once, kept in floating point
    let ycc: Vec<[f64; 3]> = frame
        .samples()
        .chunks_exact(3)
        .map(|p| rgb_to_ycbcr(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])))
        .collect();

    let mut writer = BitWriter::new(out);
    let mut pred = [0i32; 3];
    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    for by in 0..bh {
        for bx in 0..bw {
            for comp in 0..3 {
                let mut block = [0.0; 64];
                for y in 0..8 {
                    let sy = (by * 8 + y).min(h - 1);
                    for x in 0..8 {
                        let sx = (bx * 8 + x).min(w - 1);
                        block[y * 8 + x] = ycc[sy * w + sx][comp] - 128.0;
                    }
                }
                let coef = fdct8x8(&block);
                let table = &tables[usize::from(comp > 0)];
                let mut zz = [0i32; 64];
                for (k, &n) in ZIGZAG.iter().enumerate() {
                    zz[k] = (coef[n] / f64::from(table[n])).round() as i32;
                }
                let t = usize::from(comp > 0);
                encode_block(&mut writer, &zz, &mut pred[comp], &dc[t], &ac[t]);
            }
        }
    }
    let mut out = writer.finish();
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}

fn encode_block(writer: &mut BitWriter, zz: &[i32; 64], pred: &mut i32, dc: &EncodeTable, ac: &EncodeTable) {
    let diff = zz[0] - *pred;
    *pred = zz[0];
    let (size, bits) = magnitude_bits(diff);
    let (code, len) = dc.codes[size as usize];
    writer.put(code, len);
    writer.put(bits, size);

    let mut run = 0u8;
    for &v in &zz[1..] {
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            let (code, len) = ac.codes[0xF0];
            writer.put(code, len);
            run -= 16;
        }
        let (size, bits) = magnitude_bits(v);
        let (code, len) = ac.codes[((run << 4) | size) as usize];
        writer.put(code, len);
        writer.put(bits, size);
        run = 0;
    }
    if run > 0 {
        let (code, len) = ac.codes[0x00];
        writer.put(code, len);
    }
}

/// Canonical Huffman decoding table.
#[derive(Clone)]
struct DecodeTable {
    maxcode: [i32; 17],
    valptr: [i32; 17],
    mincode: [i32; 17],
    values: Vec<u8>,
}

impl DecodeTable {
    fn new(bits: &[u8; 16], values: Vec<u8>) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(Error::Jpeg("malformed Huffman table".into()));
        }
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0i32; 17];
        let mut mincode = [0i32; 17];
        let mut code = 0i32;
        let mut k = 0i32;
        for len in 1..=16 {
            let count = i32::from(bits[len - 1]);
            if count > 0 {
                valptr[len] = k;
                mincode[len] = code;
                code += count;
                k += count;
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
        Ok(DecodeTable { maxcode, valptr, mincode, values })
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    nbits: u32,
    hit_marker: bool,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        BitReader { data, pos, acc: 0, nbits: 0, hit_marker: false }
    }

    fn fill_byte(&mut self) {
        let mut byte = 0u8;
        if !self.hit_marker && self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b == 0xFF {
                let next = self.data.get(self.pos + 1).copied().unwrap_or(0);
                if next == 0x00 {
                    byte = 0xFF;
                    self.pos += 2;
                } else {
                    self.hit_marker = true;
                }
            } else {
                byte = b;
                self.pos += 1;
            }
        }
        self.acc = (self.acc << 8) | u32::from(byte);
        self.nbits += 8;
    }

    fn bit(&mut self) -> u32 {
        if self.nbits == 0 {
            self.fill_byte();
        }
        self.nbits -= 1;
        (self.acc >> self.nbits) & 1
    }

    fn bits(&mut self, n: u8) -> u32 {
        (0..n).fold(0, |acc, _| (acc << 1) | self.bit())
    }

    fn decode(&mut self, table: &DecodeTable) -> Result<u8> {
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | self.bit() as i32;
            if code <= table.maxcode[len] {
                let idx = table.valptr[len] + code - table.mincode[len];
                return table
                    .values
                    .get(idx as usize)
                    .copied()
                    .ok_or_else(|| Error::Jpeg("Huffman index out of range".into()));
            }
        }
        Err(Error::Jpeg("invalid Huffman code".into()))
    }

    fn receive_extend(&mut self, size: u8) -> i32 {
        if size == 0 {
            return 0;
        }
        let v = self.bits(size) as i32;
        if v < (1 << (size - 1)) {
            v - (1 << size) + 1
        } else {
            v
        }
    }

    /// Drops buffered bits and consumes an RSTn marker if one is next.
    fn restart(&mut self) -> Result<()> {
        self.acc = 0;
        self.nbits = 0;
        self.hit_marker = false;
        match self.data.get(self.pos..self.pos + 2) {
            Some([0xFF, m]) if (0xD0..=0xD7).contains(m) => {
                self.pos += 2;
                Ok(())
            }
            _ => Err(Error::Jpeg("expected restart marker".into())),
        }
    }
}

struct Component {
    id: u8,
    qt: usize,
    dc: usize,
    ac: usize,
}

/// Decodes a baseline JPEG produced by [`encode`] (or any baseline file with
/// one or three components at 1x1 sampling).
pub fn decode(data: &[u8]) -> Result<Frame> {
    if data.len() < 4 || data[0] != 0xFF || data[1] != 0xD8 {
        return Err(Error::Jpeg("missing SOI marker".into()));
    }
    let mut qts: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dcs: [Option<DecodeTable>; 4] = Default::default();
    let mut acs: [Option<DecodeTable>; 4] = Default::default();
    let mut comps: Vec<Component> = Vec::new();
    let (mut w, mut h) = (0usize, 0usize);
    let mut restart_interval = 0usize;
    let mut pos = 2;

    loop {
        while data.get(pos) == Some(&0xFF) && data.get(pos + 1) == Some(&0xFF) {
            pos += 1;
        }
        let marker = match data.get(pos..pos + 2) {
            Some([0xFF, m]) => *m,
            _ => return Err(Error::Jpeg(format!("expected marker at offset {pos}"))),
        };
        pos += 2;
        if marker == 0xD9 {
            return Err(Error::Jpeg("EOI before scan data".into()));
        }
        let len = data
            .get(pos..pos + 2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as usize)
            .ok_or_else(|| Error::Jpeg("truncated segment".into()))?;
        let seg = data.get(pos + 2..pos + len).ok_or_else(|| Error::Jpeg("truncated segment".into()))?;
        pos += len;

        match marker {
            0xDB => {
                let mut s = seg;
                while !s.is_empty() {
                    let (precision, id) = (s[0] >> 4, (s[0] & 0x0F) as usize);
                    if precision != 0 || id > 3 || s.len() < 65 {
                        return Err(Error::Jpeg("unsupported quantization table".into()));
                    }
                    let mut table = [0u16; 64];
                    for (k, &n) in ZIGZAG.iter().enumerate() {
                        table[n] = u16::from(s[1 + k]);
                    }
                    qts[id] = Some(table);
                    s = &s[65..];
                }
            }
            0xC4 => {
                let mut s = seg;
                while !s.is_empty() {
                    if s.len() < 17 {
                        return Err(Error::Jpeg("truncated Huffman table".into()));
                    }
                    let (class, id) = (s[0] >> 4, (s[0] & 0x0F) as usize);
                    let mut bits = [0u8; 16];
                    bits.copy_from_slice(&s[1..17]);
                    let n: usize = bits.iter().map(|&b| b as usize).sum();
                    let values = s.get(17..17 + n).ok_or_else(|| Error::Jpeg("truncated Huffman table".into()))?;
                    if id > 3 {
                        return Err(Error::Jpeg("Huffman table id out of range".into()));
                    }
                    let table = DecodeTable::new(&bits, values.to_vec())?;
                    match class {
                        0 => dcs[id] = Some(table),
                        1 => acs[id] = Some(table),
                        _ => return Err(Error::Jpeg("bad Huffman table class".into())),
                    }
                    s = &s[17 + n..];
                }
            }
            0xC0 | 0xC1 => {
                if seg.len() < 6 || seg[0] != 8 {
                    return Err(Error::Jpeg("only 8-bit precision is supported".into()));
                }
                h = u16::from_be_bytes([seg[1], seg[2]]) as usize;
                w = u16::from_be_bytes([seg[3], seg[4]]) as usize;
                let n = seg[5] as usize;
                if n != 1 && n != 3 || seg.len() < 6 + 3 * n {
                    return Err(Error::Jpeg(format!("unsupported component count {n}")));
                }
                comps.clear();
                for c in 0..n {
                    let b = &seg[6 + 3 * c..9 + 3 * c];
                    if b[1] != 0x11 {
                        return Err(Error::Jpeg("only 1x1 sampling is supported".into()));
                    }
                    comps.push(Component { id: b[0], qt: (b[2] & 3) as usize, dc: 0, ac: 0 });
                }
            }
            0xC2..=0xCF if marker != 0xC4 && marker != 0xC8 && marker != 0xCC => {
                return Err(Error::Jpeg(format!("unsupported frame type 0x{marker:02X}")));
            }
            0xDD => {
                if seg.len() < 2 {
                    return Err(Error::Jpeg("truncated DRI".into()));
                }
                restart_interval = u16::from_be_bytes([seg[0], seg[1]]) as usize;
            }
            0xDA => {
                if comps.is_empty() {
                    return Err(Error::Jpeg("scan before frame header".into()));
                }
                let n = seg[0] as usize;
                if n != comps.len() || seg.len() < 1 + 2 * n {
                    return Err(Error::Jpeg("only single interleaved scans are supported".into()));
                }
                for c in 0..n {
                    let (id, tables) = (seg[1 + 2 * c], seg[2 + 2 * c]);
                    let comp = comps
                        .iter_mut()
                        .find(|k| k.id == id)
                        .ok_or_else(|| Error::Jpeg("scan references unknown component".into()))?;
                    comp.dc = (tables >> 4) as usize & 3;
                    comp.ac = (tables & 0x0F) as usize & 3;
                }
                return decode_scan(data, pos, w, h, &comps, &qts, &dcs, &acs, restart_interval);
            }
            _ => {}
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn decode_scan(
    data: &[u8],
    pos: usize,
    w: usize,
    h: usize,
    comps: &[Component],
    qts: &[Option<[u16; 64]>; 4],
    dcs: &[Option<DecodeTable>; 4],
    acs: &[Option<DecodeTable>; 4],
    restart_interval: usize,
) -> Result<Frame> {
    if w == 0 || h == 0 {
        return Err(Error::Jpeg("zero image dimension".into()));
    }
    let missing = || Error::Jpeg("scan references a missing table".into());
    let mut tables = Vec::with_capacity(comps.len());
    for c in comps {
        tables.push((
            qts[c.qt].as_ref().ok_or_else(missing)?,
            dcs[c.dc].as_ref().ok_or_else(missing)?,
            acs[c.ac].as_ref().ok_or_else(missing)?,
        ));
    }

    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    let mut planes = vec![vec![0.0f64; w * h]; comps.len()];
    let mut reader = BitReader::new(data, pos);
    let mut pred = vec![0i32; comps.len()];
    let mut mcus = 0usize;

    for by in 0..bh {
        for bx in 0..bw {
            if restart_interval > 0 && mcus > 0 && mcus.is_multiple_of(restart_interval) {
                reader.restart()?;
                pred.iter_mut().for_each(|p| *p = 0);
            }
            mcus += 1;
            for (ci, (qt, dc, ac)) in tables.iter().enumerate() {
                let mut coef = [0.0f64; 64];
                let size = reader.decode(dc)?;
                if size > 11 {
                    return Err(Error::Jpeg("DC magnitude out of range".into()));
                }
                pred[ci] += reader.receive_extend(size);
                coef[0] = f64::from(pred[ci]) * f64::from(qt[0]);
                let mut k = 1;
                while k < 64 {
                    let rs = reader.decode(ac)?;
                    let (run, size) = ((rs >> 4) as usize, rs & 0x0F);
                    if size == 0 {
                        if run == 15 {
                            k += 16;
                            continue;
                        }
                        break;
                    }
                    k += run;
                    if k > 63 {
                        return Err(Error::Jpeg("AC coefficient index out of range".into()));
                    }
                    let n = ZIGZAG[k];
                    coef[n] = f64::from(reader.receive_extend(size)) * f64::from(qt[n]);
                    k += 1;
                }
                let block = idct8x8(&coef);
                for y in 0..8 {
                    let py = by * 8 + y;
                    if py >= h {
                        break;
                    }
                    for x in 0..8 {
                        let px = bx * 8 + x;
                        if px < w {
                            planes[ci][py * w + px] = block[y * 8 + x] + 128.0;
                        }
                    }
                }
            }
        }
    }

    let mut samples = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        let rgb = if planes.len() == 3 {
            ycbcr_to_rgb(planes[0][i], planes[1][i], planes[2][i])
        } else {
            [planes[0][i]; 3]
        };
        samples.extend(rgb.iter().map(|&v| quantize(v)));
    }
    Frame::new(w, h, samples)
}

/// Encode then decode at `quality`.
pub fn roundtrip(frame: &Frame, quality: u8) -> Result<Frame> {
    decode(&encode(frame, quality)?)
}
