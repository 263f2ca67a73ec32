//! Planning models for a three-echelon humanitarian vaccine supply chain.
//!
//! Instances ([`model_data`]) are turned into a mixed-integer program
//! ([`builder`]), optionally protected against supply uncertainty
//! ([`robust`]), solved ([`solver`]) and swept over scenarios
//! ([`analysis`]).

pub mod analysis;
pub mod builder;
pub mod lp;
pub mod model_data;
pub mod robust;
pub mod solver;
