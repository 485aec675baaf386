//! Deterministic heatmap rasters: field outline, per-cell colormap, player and ball markers.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spacefield::pitch_control::ControlGrid;
use spacefield::space_data::SportConfig;
use spacefield::{GameState, Vec2};

use crate::CliError;

type Rgb = [u8; 3];

const OUTLINE: Rgb = [40, 40, 40];
const BACKGROUND: Rgb = [255, 255, 255];
const MASKED: Rgb = [200, 200, 200];
const ATTACKER: Rgb = [230, 120, 0];
const DEFENDER: Rgb = [20, 20, 90];
const BALL: Rgb = [255, 230, 0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Colormap {
    /// Blue at 0, white at 0.5, red at 1; attacker control reads red.
    Diverging,
    /// White at 0 to red at `vmax` (the field maximum when unset).
    Sequential { vmax: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    /// Pixels per grid cell side.
    pub cell_px: u32,
    pub margin_px: u32,
    pub marker_radius: f64,
    pub colormap: Colormap,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            cell_px: 8,
            margin_px: 6,
            marker_radius: 4.0,
            colormap: Colormap::Diverging,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// RGB, row-major from the top-left corner.
    pub pixels: Vec<u8>,
}

impl Image {
    fn new(width: u32, height: u32, fill: Rgb) -> Image {
        let pixels = fill
            .iter()
            .copied()
            .cycle()
            .take((width * height * 3) as usize)
            .collect();
        Image { width, height, pixels }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = ((y * self.width + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, x: u32, y: u32, c: Rgb) {
        let i = ((y * self.width + x) * 3) as usize;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// The image rotated by 180 degrees.
    pub fn rotated_half_turn(&self) -> Image {
        let mut out = Image::new(self.width, self.height, BACKGROUND);
        for y in 0..self.height {
            for x in 0..self.width {
                out.put(self.width - 1 - x, self.height - 1 - y, self.pixel(x, y));
            }
        }
        out
    }
}

fn lerp_rgb(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let ch = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    [ch(0), ch(1), ch(2)]
}

fn color(value: f64, map: Colormap, field_max: f64) -> Rgb {
    const BLUE: Rgb = [33, 102, 172];
    const WHITE: Rgb = [247, 247, 247];
    const RED: Rgb = [178, 24, 43];
    if !value.is_finite() {
        return MASKED;
    }
    match map {
        Colormap::Diverging if value < 0.5 => lerp_rgb(BLUE, WHITE, value * 2.0),
        Colormap::Diverging => lerp_rgb(WHITE, RED, (value - 0.5) * 2.0),
        Colormap::Sequential { vmax } => {
            let top = vmax.unwrap_or(field_max);
            let t = if top > 0.0 { value / top } else { 0.0 };
            lerp_rgb(WHITE, RED, t)
        }
    }
}

/// Rasterizes the attack plane of `grid` with `state`'s players on top.
pub fn render_image(grid: &ControlGrid, state: &GameState, config: &SportConfig, style: &Style) -> Result<Image, CliError> {
    let spec = &grid.spec;
    if spec.length != config.field_length || spec.width != config.field_width {
        return Err(CliError::Geometry(format!(
            "grid covers {} x {} m but the field is {} x {} m",
            spec.length, spec.width, config.field_length, config.field_width
        )));
    }
    if style.cell_px == 0 {
        return Err(CliError::Config("cell_px must be >= 1".into()));
    }
    let cp = style.cell_px;
    let m = style.margin_px.max(1);
    let (inner_w, inner_h) = (spec.nx as u32 * cp, spec.ny as u32 * cp);
    let mut img = Image::new(inner_w + 2 * m, inner_h + 2 * m, BACKGROUND);

    let field_max = spec
        .unmasked()
        .map(|i| grid.attack[i])
        .fold(0.0f64, f64::max);
    for i in 0..spec.len() {
        let (ix, iy) = spec.coords(i);
        let c = if spec.is_masked(i) {
            MASKED
        } else {
            color(grid.attack[i], style.colormap, field_max)
        };
        let x0 = m + ix as u32 * cp;
        let y0 = m + (spec.ny - 1 - iy) as u32 * cp;
        for y in y0..y0 + cp {
            for x in x0..x0 + cp {
                img.put(x, y, c);
            }
        }
    }
    for x in m - 1..=m + inner_w {
        img.put(x, m - 1, OUTLINE);
        img.put(x, m + inner_h, OUTLINE);
    }
    for y in m - 1..=m + inner_h {
        img.put(m - 1, y, OUTLINE);
        img.put(m + inner_w, y, OUTLINE);
    }

    // Markers are placed in coordinates centered on the image so that a
    // point-mirrored frame lands on exactly mirrored pixels.
    let (half_w, half_h) = (img.width as f64 / 2.0, img.height as f64 / 2.0);
    let to_px = |p: Vec2| Vec2::new(p.x / spec.length * inner_w as f64, -(p.y / spec.width * inner_h as f64));
    let dot = |img: &mut Image, p: Vec2, radius: f64, c: Rgb| {
        let center = to_px(p);
        let r2 = radius * radius;
        for y in 0..img.height {
            let cy = y as f64 + 0.5 - half_h;
            if (cy - center.y).abs() > radius {
                continue;
            }
            for x in 0..img.width {
                let cx = x as f64 + 0.5 - half_w;
                let (dx, dy) = (cx - center.x, cy - center.y);
                if dx * dx + dy * dy <= r2 {
                    img.put(x, y, c);
                }
            }
        }
    };
    for p in &state.defenders {
        dot(&mut img, p.position, style.marker_radius, DEFENDER);
    }
    for p in &state.attackers {
        dot(&mut img, p.position, style.marker_radius, ATTACKER);
    }
    if let Some(b) = state.ball {
        dot(&mut img, b, style.marker_radius * 0.6, BALL);
    }
    Ok(img)
}

/// PNG bytes with the given `tEXt` entries.
pub fn encode_png(img: &Image, text: &[(&str, String)]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width, img.height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        for (k, v) in text {
            enc.add_text_chunk(k.to_string(), v.clone())
                .map_err(|e| CliError::Render(e.to_string()))?;
        }
        let mut writer = enc.write_header().map_err(|e| CliError::Render(e.to_string()))?;
        writer
            .write_image_data(&img.pixels)
            .map_err(|e| CliError::Render(e.to_string()))?;
    }
    Ok(out)
}

/// Renders and encodes, tagging the image with the grid's provenance.
pub fn render_heatmap(grid: &ControlGrid, state: &GameState, config: &SportConfig, style: &Style) -> Result<Vec<u8>, CliError> {
    let img = render_image(grid, state, config, style)?;
    let frame = grid.meta.frame.map_or_else(|| "-".to_string(), |f| f.to_string());
    encode_png(
        &img,
        &[
            ("Software", format!("spacefield {}", env!("CARGO_PKG_VERSION"))),
            ("Model", grid.meta.model.clone()),
            ("Frame", frame),
            ("ParamsHash", grid.meta.params_hash.clone()),
        ],
    )
}

pub fn write_heatmap(
    path: &Path,
    grid: &ControlGrid,
    state: &GameState,
    config: &SportConfig,
    style: &Style,
) -> Result<Vec<u8>, CliError> {
    let bytes = render_heatmap(grid, state, config, style)?;
    std::fs::write(path, &bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(bytes)
}

/// Decodes a PNG into RGB pixels and its text chunks.
pub fn decode_png(bytes: &[u8]) -> Result<(Image, Vec<(String, String)>), CliError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| CliError::Render(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| CliError::Render("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| CliError::Render(e.to_string()))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(CliError::Render("expected 8-bit RGB".into()));
    }
    buf.truncate(info.buffer_size());
    let text = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .map(|t| (t.keyword.clone(), t.text.clone()))
        .collect();
    Ok((
        Image {
            width: info.width,
            height: info.height,
            pixels: buf,
        },
        text,
    ))
}
