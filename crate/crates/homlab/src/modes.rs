//! Port and polarization labels for transfer-matrix modes.

use crate::error::{Error, Result};

/// Polarization of a mode in the four-mode network.
///
/// Outputs are detected in the horizontal/vertical basis; the network's
/// inputs are circular (unknown side) and diagonal (reference side).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Horizontal,
    Vertical,
    RightCircular,
    LeftCircular,
    Diagonal,
    AntiDiagonal,
}

impl Polarization {
    pub fn letter(self) -> char {
        match self {
            Polarization::Horizontal => 'h',
            Polarization::Vertical => 'v',
            Polarization::RightCircular => 'r',
            Polarization::LeftCircular => 'l',
            Polarization::Diagonal => 'd',
            Polarization::AntiDiagonal => 'a',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        Ok(match c.to_ascii_lowercase() {
            'h' => Polarization::Horizontal,
            'v' => Polarization::Vertical,
            'r' => Polarization::RightCircular,
            'l' => Polarization::LeftCircular,
            'd' => Polarization::Diagonal,
            'a' => Polarization::AntiDiagonal,
            other => return Err(Error::Parse(format!("unknown polarization '{other}'"))),
        })
    }
}

/// Human-readable name of one mode: a port, optionally with a polarization.
///
/// Two-port matrices use bare ports "1" and "2"; four-mode matrices carry a
/// polarization, e.g. "1h" or "2d".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLabel {
    pub port: u8,
    pub polarization: Option<Polarization>,
}

impl ModeLabel {
    pub fn port(port: u8) -> Self {
        Self {
            port,
            polarization: None,
        }
    }

    pub fn polarized(port: u8, polarization: Polarization) -> Self {
        Self {
            port,
            polarization: Some(polarization),
        }
    }
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.polarization {
            Some(p) => write!(f, "{}{}", self.port, p.letter()),
            None => write!(f, "{}", self.port),
        }
    }
}

impl std::str::FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let port = chars
            .next()
            .and_then(|c| c.to_digit(10))
            .ok_or_else(|| Error::Parse(format!("bad mode label '{s}'")))? as u8;
        if port != 1 && port != 2 {
            return Err(Error::Parse(format!("port must be 1 or 2 in '{s}'")));
        }
        let polarization = match chars.next() {
            None => None,
            Some(c) => Some(Polarization::from_letter(c)?),
        };
        if chars.next().is_some() {
            return Err(Error::Parse(format!("bad mode label '{s}'")));
        }
        Ok(Self { port, polarization })
    }
}

/// Canonical labels for an m-mode matrix: bare ports for m = 2, the
/// polarization network's output basis for m = 4.
pub fn canonical_output_labels(m: usize) -> Result<Vec<ModeLabel>> {
    match m {
        2 => Ok(vec![ModeLabel::port(1), ModeLabel::port(2)]),
        4 => Ok(vec![
            ModeLabel::polarized(1, Polarization::Horizontal),
            ModeLabel::polarized(1, Polarization::Vertical),
            ModeLabel::polarized(2, Polarization::Horizontal),
            ModeLabel::polarized(2, Polarization::Vertical),
        ]),
        other => Err(Error::InvalidMatrix(format!(
            "mode count must be 2 or 4, got {other}"
        ))),
    }
}
