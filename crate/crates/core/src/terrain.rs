//! Ground height fields queried by the contact model.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerrainKind {
    Flat,
    Uneven,
}

impl std::str::FromStr for TerrainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(TerrainKind::Flat),
            "uneven" => Ok(TerrainKind::Uneven),
            other => Err(format!("unknown terrain `{other}` (expected flat or uneven)")),
        }
    }
}

impl std::fmt::Display for TerrainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerrainKind::Flat => "flat",
            TerrainKind::Uneven => "uneven",
        })
    }
}

/// A 1-D height field `h(x)` along the sagittal direction.
#[derive(Debug, Clone, PartialEq)]
pub enum Terrain {
    Flat,
    /// Seeded value noise: uniform lattice values in `[-amplitude, amplitude]`
    /// every `correlation_length` meters, smoothstep-interpolated between
    /// lattice points. Interpolation is convex, so `|h| <= amplitude`.
    ValueNoise {
        seed: u64,
        amplitude: f64,
        correlation_length: f64,
    },
}

pub const UNEVEN_AMPLITUDE: f64 = 0.03;
pub const UNEVEN_CORRELATION_LENGTH: f64 = 0.3;

/// Builds the height field for `kind`; the seed only matters for uneven ground.
pub fn make_terrain(kind: TerrainKind, seed: u64) -> Terrain {
    match kind {
        TerrainKind::Flat => Terrain::Flat,
        TerrainKind::Uneven => Terrain::ValueNoise {
            seed,
            amplitude: UNEVEN_AMPLITUDE,
            correlation_length: UNEVEN_CORRELATION_LENGTH,
        },
    }
}

impl Terrain {
    pub fn height(&self, x: f64) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::ValueNoise {
                seed,
                amplitude,
                correlation_length,
            } => {
                let u = x / correlation_length;
                let cell = u.floor();
                let frac = u - cell;
                let i = cell as i64;
                let a = lattice_value(seed, i);
                let b = lattice_value(seed, i.wrapping_add(1));
                let s = frac * frac * (3.0 - 2.0 * frac);
                amplitude * (a + (b - a) * s)
            }
        }
    }

    pub fn kind(&self) -> TerrainKind {
        match self {
            Terrain::Flat => TerrainKind::Flat,
            Terrain::ValueNoise { .. } => TerrainKind::Uneven,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1]` attached to lattice point `i`.
fn lattice_value(seed: u64, i: i64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(i as u64));
    let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * unit - 1.0
}
