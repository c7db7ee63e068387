use std::io::{Read, Seek};
use std::path::Path;

use super::AudioClip;
use crate::{Error, Result};

fn decode<R: Read>(reader: hound::WavReader<R>) -> Result<AudioClip> {
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::invalid(format!(
            "only 16-bit PCM WAV is supported, got {:?} {}-bit",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = spec.channels.max(1) as usize;
    let raw: Vec<i16> = reader.into_samples::<i16>().collect::<Result<_, _>>()?;
    // Interleaved channels are averaged down to mono.
    let samples = raw
        .chunks_exact(channels)
        .map(|frame| frame.iter().map(|&s| s as f64 / 32768.0).sum::<f64>() / channels as f64)
        .collect();
    AudioClip::new(samples, spec.sample_rate)
}

pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(other),
    })?;
    decode(reader)
}

pub fn read_wav_bytes(bytes: &[u8]) -> Result<AudioClip> {
    decode(hound::WavReader::new(std::io::Cursor::new(bytes))?)
}

fn encode<W: std::io::Write + Seek>(clip: &AudioClip, writer: W) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::new(writer, spec)?;
    for &s in clip.samples() {
        w.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)?;
    }
    w.finalize()?;
    Ok(())
}

/// Write a mono 16-bit PCM WAV.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    encode(clip, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereo_is_averaged() {
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cur = std::io::Cursor::new(Vec::new());
        {
            let mut w = hound::WavWriter::new(&mut cur, spec).unwrap();
            for (l, r) in [(16384i16, 0i16), (-16384, -16384)] {
                w.write_sample(l).unwrap();
                w.write_sample(r).unwrap();
            }
            w.finalize().unwrap();
        }
        let clip = read_wav_bytes(cur.get_ref()).unwrap();
        assert_eq!(clip.samples(), &[0.25, -0.5]);
        assert_eq!(clip.sample_rate(), 16_000);
    }

    #[test]
    fn mono_round_trip_within_quantization() {
        let clip = AudioClip::new(vec![0.0, 0.5, -0.25, 0.999], 44_100).unwrap();
        let mut cur = std::io::Cursor::new(Vec::new());
        encode(&clip, &mut cur).unwrap();
        let back = read_wav_bytes(cur.get_ref()).unwrap();
        for (a, b) in clip.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1.0 / 16384.0);
        }
    }

    #[test]
    fn rejects_float_wav() {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut cur = std::io::Cursor::new(Vec::new());
        {
            let mut w = hound::WavWriter::new(&mut cur, spec).unwrap();
            w.write_sample(0.5f32).unwrap();
            w.finalize().unwrap();
        }
        assert!(read_wav_bytes(cur.get_ref()).is_err());
    }
}
