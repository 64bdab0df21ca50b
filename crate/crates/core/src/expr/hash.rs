use super::Value;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Deterministic commitment digest used by `hash(..)`: 64-bit FNV-1a over a
/// type-tagged encoding (`I:<decimal>`, `B:true|false`, `T:<utf-8>`), printed
/// as 16 lowercase hex digits. Not a cryptographic hash.
pub fn fnv1a_hex(value: &Value) -> Option<String> {
    let encoded = match value {
        Value::Int(i) => format!("I:{i}"),
        Value::Bool(b) => format!("B:{b}"),
        Value::Text(s) => format!("T:{s}"),
        Value::Undefined => return None,
    };
    Some(format!("{:016x}", fnv1a(encoded.as_bytes())))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Digests computed with an independent script over the tagged encodings.
    #[test]
    fn frozen_digests() {
        let cases = [
            (Value::Text("42".into()), "9f9484fa3eeba4dd"),
            (Value::Int(42), "a254f0d0a37eb388"),
            (Value::Bool(true), "b6a84e41c26cddad"),
            (Value::Bool(false), "018974d0b03cebc0"),
            (Value::Text(String::new()), "09350607b5c73bdb"),
            (Value::Int(-7), "a27365d0a39877e6"),
            (Value::Text("s3cret".into()), "923a5e5abb53360d"),
        ];
        for (value, digest) in cases {
            assert_eq!(fnv1a_hex(&value).as_deref(), Some(digest), "{value}");
        }
        assert_eq!(fnv1a_hex(&Value::Undefined), None);
    }
}
