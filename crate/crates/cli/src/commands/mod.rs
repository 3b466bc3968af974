pub mod compare;
pub mod gradcheck;
pub mod train;
pub mod verify;
