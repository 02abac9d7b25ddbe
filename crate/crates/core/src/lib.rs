// SPDX-License-Identifier: Apache-2.0

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod block;
pub mod error;
pub mod protocol;
pub mod sim;
pub mod tree;
