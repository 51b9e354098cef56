use super::AudioClip;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;

struct Format {
    channels: u16,
    sample_rate: u32,
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::Wav("fmt chunk truncated".into()));
    }
    let tag = read_u16(body, 0);
    if tag != FORMAT_PCM {
        return Err(Error::UnsupportedEncoding(tag));
    }
    let channels = read_u16(body, 2);
    let sample_rate = read_u32(body, 4);
    let bits = read_u16(body, 14);
    if bits != 16 {
        return Err(Error::UnsupportedBitDepth(bits));
    }
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedChannels(channels));
    }
    if sample_rate == 0 {
        return Err(Error::Wav("sample rate is zero".into()));
    }
    Ok(Format {
        channels,
        sample_rate,
    })
}

/// Decodes a 16-bit PCM RIFF/WAVE byte stream. Stereo is averaged to mono;
/// the sample rate is taken from the header as-is.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 {
        return Err(Error::Wav("file too small for a RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::Wav("missing RIFF marker".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::Wav("missing WAVE marker".into()));
    }

    let mut format: Option<Format> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Error::Wav(format!("chunk '{}' truncated", String::from_utf8_lossy(id)))
            })?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => format = Some(parse_fmt(body)?),
            b"data" => {
                let fmt = format
                    .as_ref()
                    .ok_or_else(|| Error::Wav("data chunk before fmt chunk".into()))?;
                return decode_pcm16(body, fmt);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
    Err(Error::Wav(if format.is_none() {
        "no fmt chunk".into()
    } else {
        "no data chunk".into()
    }))
}

fn decode_pcm16(data: &[u8], fmt: &Format) -> Result<AudioClip> {
    let channels = fmt.channels as usize;
    let frame_bytes = 2 * channels;
    if !data.len().is_multiple_of(frame_bytes) {
        return Err(Error::Wav(format!(
            "data chunk of {} bytes is not a whole number of {frame_bytes}-byte frames",
            data.len()
        )));
    }
    let samples: Vec<f64> = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|s| i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0)
                .sum();
            sum / channels as f64
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::Wav("data chunk is empty".into()));
    }
    AudioClip::new(samples, fmt.sample_rate)
}

/// Encodes a clip as mono 16-bit PCM WAV. Samples are quantized with
/// round-to-nearest and clamped to the i16 range.
pub fn write_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in clip.samples() {
        let q = (s * 32768.0)
            .round()
            .clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}
