use std::fmt;

use serde::{Serialize, Serializer};

macro_rules! entity_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        ///
        /// Stored 0-based; displayed and serialized 1-based.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            /// Builds an id from its 1-based number. Returns `None` for 0.
            pub fn from_number(number: usize) -> Option<Self> {
                number.checked_sub(1).map(Self)
            }

            pub fn index(self) -> usize {
                self.0
            }

            /// The 1-based number used in files and reports.
            pub fn number(self) -> usize {
                self.0 + 1
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.number())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_u64(self.number() as u64)
            }
        }
    };
}

entity_id!(
    /// A customer (applicant in house-allocation mode).
    Customer
);
entity_id!(
    /// A candidate plant (house in house-allocation mode).
    Plant
);
