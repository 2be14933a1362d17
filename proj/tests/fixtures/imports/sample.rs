use std::collections::HashMap;
use serde::{Serialize, Deserialize};
pub use crate::engine::Model;
pub(crate) use core::fmt;
extern crate log;

fn main() {}
