//! Symmetric quadrature rules on triangles, in barycentric coordinates.
//! Weights sum to one; multiply by the triangle area.

/// A rule as (barycentric point, weight) pairs.
pub type Rule = &'static [([f64; 3], f64)];

/// Edge midpoints, exact for degree 2.
pub const DEGREE2: Rule = &[
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;
const WA4: f64 = 0.223_381_589_678_011;
const WB4: f64 = 0.109_951_743_655_322;

/// Six-point rule, exact for degree 4.
pub const DEGREE4: Rule = &[
    ([A4, A4, 1.0 - 2.0 * A4], WA4),
    ([A4, 1.0 - 2.0 * A4, A4], WA4),
    ([1.0 - 2.0 * A4, A4, A4], WA4),
    ([B4, B4, 1.0 - 2.0 * B4], WB4),
    ([B4, 1.0 - 2.0 * B4, B4], WB4),
    ([1.0 - 2.0 * B4, B4, B4], WB4),
];

const A5: f64 = 0.059_715_871_789_770;
const B5: f64 = 0.470_142_064_105_115;
const C5: f64 = 0.797_426_985_353_087;
const D5: f64 = 0.101_286_507_323_456;
const WB5: f64 = 0.132_394_152_788_506;
const WD5: f64 = 0.125_939_180_544_827;

/// Seven-point rule, exact for degree 5.
pub const DEGREE5: Rule = &[
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([A5, B5, B5], WB5),
    ([B5, A5, B5], WB5),
    ([B5, B5, A5], WB5),
    ([C5, D5, D5], WD5),
    ([D5, C5, D5], WD5),
    ([D5, D5, C5], WD5),
];

/// Maps a barycentric point to Cartesian coordinates.
#[inline]
pub fn to_cartesian(corners: &[[f64; 2]; 3], bary: &[f64; 3]) -> [f64; 2] {
    [
        bary[0] * corners[0][0] + bary[1] * corners[1][0] + bary[2] * corners[2][0],
        bary[0] * corners[0][1] + bary[1] * corners[1][1] + bary[2] * corners[2][1],
    ]
}
