//! Aspect-preserving resize plus centered padding, modeled as the pure
//! coordinate transform between image space and network input space.

use super::PostprocessError;
use crate::types::BoundingBox;

#[derive(Debug, Clone, PartialEq)]
pub struct LetterboxTransform {
    scale: f64,
    pad_x: f64,
    pad_y: f64,
    input_size: (u32, u32),
    network_size: (u32, u32),
}

impl LetterboxTransform {
    /// Build the transform for an `input_size` (width, height) image
    /// mapped into a `network_size` canvas: uniform scale
    /// `min(net_w/in_w, net_h/in_h)` with the image centered.
    pub fn new(
        input_size: (u32, u32),
        network_size: (u32, u32),
    ) -> Result<Self, PostprocessError> {
        if input_size.0 == 0 || input_size.1 == 0 || network_size.0 == 0 || network_size.1 == 0 {
            return Err(PostprocessError::InvalidConfig {
                reason: format!(
                    "letterbox sizes must be positive, got input {}x{} network {}x{}",
                    input_size.0, input_size.1, network_size.0, network_size.1
                ),
            });
        }
        let scale = (network_size.0 as f64 / input_size.0 as f64)
            .min(network_size.1 as f64 / input_size.1 as f64);
        let pad_x = (network_size.0 as f64 - input_size.0 as f64 * scale) / 2.0;
        let pad_y = (network_size.1 as f64 - input_size.1 as f64 * scale) / 2.0;
        Ok(Self {
            scale,
            pad_x,
            pad_y,
            input_size,
            network_size,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn padding(&self) -> (f64, f64) {
        (self.pad_x, self.pad_y)
    }

    pub fn input_size(&self) -> (u32, u32) {
        self.input_size
    }

    pub fn network_size(&self) -> (u32, u32) {
        self.network_size
    }

    pub fn point_to_network(&self, x: f64, y: f64) -> (f64, f64) {
        (x * self.scale + self.pad_x, y * self.scale + self.pad_y)
    }

    pub fn point_to_image(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.pad_x) / self.scale, (y - self.pad_y) / self.scale)
    }

    pub fn box_to_network(&self, b: BoundingBox) -> BoundingBox {
        let (x0, y0) = self.point_to_network(b.x_min(), b.y_min());
        let (x1, y1) = self.point_to_network(b.x_max(), b.y_max());
        BoundingBox::new(x0, y0, x1, y1).expect("positive-scale affine map preserves box validity")
    }

    /// Inverse transform with the result clamped to the image bounds.
    pub fn box_to_image_clamped(&self, b: BoundingBox) -> BoundingBox {
        let (w, h) = (self.input_size.0 as f64, self.input_size.1 as f64);
        let (x0, y0) = self.point_to_image(b.x_min(), b.y_min());
        let (x1, y1) = self.point_to_image(b.x_max(), b.y_max());
        BoundingBox::new(
            x0.clamp(0.0, w),
            y0.clamp(0.0, h),
            x1.clamp(0.0, w),
            y1.clamp(0.0, h),
        )
        .expect("clamped monotone map preserves box validity")
    }

    /// Inverse transform without clamping.
    pub fn box_to_image(&self, b: BoundingBox) -> BoundingBox {
        let (x0, y0) = self.point_to_image(b.x_min(), b.y_min());
        let (x1, y1) = self.point_to_image(b.x_max(), b.y_max());
        BoundingBox::new(x0, y0, x1, y1).expect("positive-scale affine map preserves box validity")
    }
}
