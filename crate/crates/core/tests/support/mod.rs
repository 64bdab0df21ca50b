#![allow(dead_code)]

pub mod criteria;
pub mod generate;
pub mod oracle;
