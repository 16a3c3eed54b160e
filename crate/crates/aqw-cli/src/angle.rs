//! Angle arguments: rational multiples of pi (`pi`, `pi/2`, `5pi/16`,
//! `-pi/3`, `2pi`) or plain radians as a decimal.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    PiRational { num: i64, den: i64 },
    Plain(f64),
}

impl Angle {
    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiRational { num, den } => num as f64 * PI / den as f64,
            Angle::Plain(v) => v,
        }
    }
}

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err("empty angle".into());
        }
        if let Some(pos) = trimmed.find("pi") {
            let (coef_str, rest) = trimmed.split_at(pos);
            let num: i64 = match coef_str {
                "" => 1,
                "-" => -1,
                other => other
                    .parse()
                    .map_err(|_| format!("bad coefficient {other:?} in angle {trimmed:?}"))?,
            };
            let den: i64 = match &rest[2..] {
                "" => 1,
                slash if slash.starts_with('/') => slash[1..]
                    .parse()
                    .map_err(|_| format!("bad denominator in angle {trimmed:?}"))?,
                other => return Err(format!("unexpected {other:?} after pi in {trimmed:?}")),
            };
            if den <= 0 {
                return Err(format!("denominator must be positive in {trimmed:?}"));
            }
            Ok(Angle::PiRational { num, den })
        } else {
            trimmed
                .parse::<f64>()
                .map(Angle::Plain)
                .map_err(|_| format!("cannot parse angle {trimmed:?}"))
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiRational { num, den } => {
                match num {
                    1 => write!(f, "pi")?,
                    -1 => write!(f, "-pi")?,
                    n => write!(f, "{n}pi")?,
                }
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            Angle::Plain(v) => write!(f, "{v}"),
        }
    }
}

/// Render radians back in rational-pi form when a small rational multiple of
/// pi matches exactly; decimal otherwise. Display-only.
pub fn render_radians(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    for den in [1i64, 2, 3, 4, 6, 8, 16, 32] {
        let num = (value * den as f64 / PI).round();
        if num.abs() > 128.0 {
            continue;
        }
        let candidate = Angle::PiRational {
            num: num as i64,
            den,
        };
        if candidate.radians() == value {
            return candidate.to_string();
        }
    }
    format!("{value}")
}
