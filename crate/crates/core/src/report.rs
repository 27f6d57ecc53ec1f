//! Serialization helpers shared by the report types.

use num_bigint::BigInt;
use serde::Serializer;

/// Big integers are emitted as decimal strings so JSON consumers never round them.
pub fn big_as_string<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
