//! Built-in reference inputs with tamper detection.
//!
//! The shipped fixture is the fractional part of π to 1100 decimal digits,
//! stored as an exact rational. Its digit string is checksummed; a mismatch
//! is refused rather than silently recomputed, so downstream regression
//! values (digit counts, Lochs values) can be trusted to refer to the same
//! input forever.

use num_bigint::BigInt;
use num_traits::Num;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// First 1100 decimal digits of π − 3.
pub const PI_MINUS_3_DIGITS: &str = concat!(
    "1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679",
    "8214808651328230664709384460955058223172535940812848111745028410270193852110555964462294895493038196",
    "4428810975665933446128475648233786783165271201909145648566923460348610454326648213393607260249141273",
    "7245870066063155881748815209209628292540917153643678925903600113305305488204665213841469519415116094",
    "3305727036575959195309218611738193261179310511854807446237996274956735188575272489122793818301194912",
    "9833673362440656643086021394946395224737190702179860943702770539217176293176752384674818467669405132",
    "0005681271452635608277857713427577896091736371787214684409012249534301465495853710507922796892589235",
    "4201995611212902196086403441815981362977477130996051870721134999999837297804995105973173281609631859",
    "5024459455346908302642522308253344685035261931188171010003137838752886587533208381420617177669147303",
    "5982534904287554687311595628638823537875937519577818577805321712268066130019278766111959092164201989",
    "3809525720106548586327886593615338182796823030195203530185296899577362259941389124972177528347913151",
);

/// SHA-256 of [`PI_MINUS_3_DIGITS`] as lowercase hex.
pub const PI_FIXTURE_SHA256: &str =
    "9043f2c1c612e6b1ce6348670e1d3d253dde4af50208f83cf684ec01afa82390";

fn build_fixture(digits: &str, expected_sha: &str) -> Result<ExactRational> {
    let mut hasher = Sha256::new();
    hasher.update(digits.as_bytes());
    let got = format!("{:x}", hasher.finalize());
    if got != expected_sha {
        return Err(Error::Fixture(format!(
            "fixture digest mismatch: expected {expected_sha}, got {got}; refusing corrupted data"
        )));
    }
    let num = BigInt::from_str_radix(digits, 10)
        .map_err(|e| Error::Fixture(format!("fixture digits unparsable: {e}")))?;
    let den = BigInt::from(10u32).pow(digits.len() as u32);
    Ok(ExactRational::new(num, den))
}

/// The π fractional-part fixture, checksum-verified on every call.
pub fn pi_fixture() -> Result<ExactRational> {
    build_fixture(PI_MINUS_3_DIGITS, PI_FIXTURE_SHA256)
}

/// Number of decimal digits the fixture carries.
pub const PI_FIXTURE_DIGITS: usize = 1100;

/// Look up a fixture by CLI name.
pub fn fixture_by_name(name: &str) -> Result<ExactRational> {
    match name {
        "pi" => pi_fixture(),
        other => Err(Error::Fixture(format!(
            "unknown fixture '{other}'; available: pi"
        ))),
    }
}
