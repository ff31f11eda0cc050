//! Byte-level framing and hex/serde adapters.
//!
//! Every framed field is a 4-byte big-endian length followed by the bytes.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraError, G1Point, G2Point, GtPoint, Scalar};

/// Accumulates length-prefixed fields.
#[derive(Clone, Debug, Default)]
pub struct Framer {
    buf: Vec<u8>,
}

impl Framer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    /// Appends raw bytes with no length prefix.
    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

/// Reads fields written by [`Framer`].
pub struct Unframer<'a> {
    rest: &'a [u8],
}

impl<'a> Unframer<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Unframer { rest: bytes }
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], AlgebraError> {
        if self.rest.len() < n {
            return Err(AlgebraError::Truncated);
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    pub fn field(&mut self) -> Result<&'a [u8], AlgebraError> {
        let len = self.raw(4)?;
        let len = u32::from_be_bytes(len.try_into().expect("4 bytes")) as usize;
        self.raw(len)
    }

    pub fn u32(&mut self) -> Result<u32, AlgebraError> {
        let f = self.field()?;
        let arr: [u8; 4] = f.try_into().map_err(|_| AlgebraError::Truncated)?;
        Ok(u32::from_be_bytes(arr))
    }

    pub fn u64(&mut self) -> Result<u64, AlgebraError> {
        let f = self.field()?;
        let arr: [u8; 8] = f.try_into().map_err(|_| AlgebraError::Truncated)?;
        Ok(u64::from_be_bytes(arr))
    }

    pub fn finish(self) -> Result<(), AlgebraError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(AlgebraError::TrailingBytes(self.rest.len()))
        }
    }
}

fn hex_decode<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
    let s = String::deserialize(d)?;
    hex::decode(s.trim_start_matches("0x")).map_err(D::Error::custom)
}

macro_rules! hex_serde {
    ($ty:ty, $decode:path) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&hex::encode(self.to_bytes()))
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let bytes = hex_decode(d)?;
                $decode(&bytes).map_err(D::Error::custom)
            }
        }
    };
}

hex_serde!(Scalar, Scalar::from_bytes);
hex_serde!(G1Point, G1Point::from_bytes);
hex_serde!(G2Point, G2Point::from_bytes);
hex_serde!(GtPoint, GtPoint::from_bytes);

/// Serde adapter for G1/G2 fields that must not be the identity.
pub mod nonidentity {
    use super::*;

    pub trait NonIdentity: Sized {
        fn encode(&self) -> Vec<u8>;
        fn decode(bytes: &[u8]) -> Result<Self, AlgebraError>;
    }

    impl NonIdentity for G1Point {
        fn encode(&self) -> Vec<u8> {
            self.to_bytes().to_vec()
        }
        fn decode(bytes: &[u8]) -> Result<Self, AlgebraError> {
            G1Point::from_bytes_nonidentity(bytes)
        }
    }

    impl NonIdentity for G2Point {
        fn encode(&self) -> Vec<u8> {
            self.to_bytes().to_vec()
        }
        fn decode(bytes: &[u8]) -> Result<Self, AlgebraError> {
            G2Point::from_bytes_nonidentity(bytes)
        }
    }

    pub fn serialize<T: NonIdentity, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v.encode()))
    }

    pub fn deserialize<'de, T: NonIdentity, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let bytes = hex_decode(d)?;
        T::decode(&bytes).map_err(D::Error::custom)
    }
}

/// Serde adapter for opaque byte strings as hex.
pub mod hex_bytes {
    use super::*;

    pub fn serialize<T: AsRef<[u8]>, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v.as_ref()))
    }

    pub fn deserialize<'de, T: TryFrom<Vec<u8>>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<T, D::Error> {
        let bytes = hex_decode(d)?;
        T::try_from(bytes).map_err(|_| D::Error::custom("wrong byte length"))
    }
}
