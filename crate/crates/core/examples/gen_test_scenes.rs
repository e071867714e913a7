//! Regenerates the procedural radiance maps under `testdata/hdr/`.
//!
//! ```text
//! cargo run -p mefuse --example gen_test_scenes [out_dir]
//! ```
//!
//! Every scene is a deterministic function of pixel position, so the output
//! is byte-identical across runs and platforms.

use std::path::PathBuf;

use mefuse::hdrio::{save_rgbe, RadianceMap};

const SIZE: usize = 512;

type Rgb = [f64; 3];
type Scene = fn(f64, f64) -> Rgb;

fn hash(x: i64, y: i64, seed: u64) -> f64 {
    let mut h = (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (y as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
        ^ seed.wrapping_mul(0x1656_67b1_9e37_79f9);
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (smooth(x - x0), smooth(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = hash(ix, iy, seed);
    let b = hash(ix + 1, iy, seed);
    let c = hash(ix, iy + 1, seed);
    let d = hash(ix + 1, iy + 1, seed);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Fractal noise in [0, 1].
fn fbm(x: f64, y: f64, seed: u64) -> f64 {
    let mut sum = 0.0;
    let mut amp = 0.5;
    let mut freq = 1.0;
    let mut norm = 0.0;
    for octave in 0..5 {
        sum += amp * value_noise(x * freq, y * freq, seed + octave);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    sum / norm
}

fn mul(c: Rgb, k: f64) -> Rgb {
    c.map(|v| v * k)
}

fn add(a: Rgb, b: Rgb) -> Rgb {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn mix(a: Rgb, b: Rgb, t: f64) -> Rgb {
    add(mul(a, 1.0 - t), mul(b, t))
}

/// Soft inside test for an axis-aligned box, 1 inside and 0 outside.
fn rect(x: f64, y: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    let e = 0.002;
    let sx = ((x - x0) / e).clamp(0.0, 1.0) * ((x1 - x) / e).clamp(0.0, 1.0);
    let sy = ((y - y0) / e).clamp(0.0, 1.0) * ((y1 - y) / e).clamp(0.0, 1.0);
    sx * sy
}

fn disc(x: f64, y: f64, cx: f64, cy: f64, r: f64) -> f64 {
    let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
    ((r - d) / 0.003).clamp(0.0, 1.0)
}

/// Point light falloff with a small core to keep it finite.
fn glow(x: f64, y: f64, cx: f64, cy: f64, core: f64) -> f64 {
    let d2 = (x - cx).powi(2) + (y - cy).powi(2);
    core * core / (d2 + core * core)
}

fn wood(x: f64, y: f64, seed: u64) -> Rgb {
    let grain = (x * 40.0 + 6.0 * fbm(x * 3.0, y * 12.0, seed)).sin() * 0.5 + 0.5;
    let t = 0.6 + 0.4 * grain * fbm(x * 20.0, y * 4.0, seed + 9);
    mul([0.55, 0.32, 0.16], t)
}

fn plaster(x: f64, y: f64, seed: u64, tint: Rgb) -> Rgb {
    mul(tint, 0.75 + 0.5 * fbm(x * 24.0, y * 24.0, seed))
}

fn printed_text(x: f64, y: f64) -> f64 {
    // rows of dark "words"
    let line = ((y * 180.0).fract() < 0.35) as u8 as f64;
    let word = (value_noise(x * 60.0, (y * 180.0).floor(), 77) > 0.35) as u8 as f64;
    1.0 - 0.8 * line * word
}

fn desk_lamp(x: f64, y: f64) -> Rgb {
    let wall = plaster(x, y, 1, [0.8, 0.75, 0.7]);
    let desk = wood(x, y, 2);
    let mut base = if y > 0.62 { desk } else { wall };
    // a printed sheet under the lamp
    let p = rect(x, y, 0.38, 0.72, 0.66, 0.9);
    base = mix(base, mul([0.95, 0.95, 0.92], printed_text(x, y)), p);
    // books on the right
    for (i, tint) in [
        [0.6, 0.1, 0.1],
        [0.1, 0.3, 0.6],
        [0.2, 0.5, 0.2],
        [0.7, 0.6, 0.2],
    ]
    .iter()
    .enumerate()
    {
        let x0 = 0.78 + 0.045 * i as f64;
        let b = rect(x, y, x0, 0.35 + 0.03 * (i % 2) as f64, x0 + 0.04, 0.62);
        base = mix(
            base,
            mul(*tint, 0.7 + 0.3 * fbm(x * 50.0, y * 5.0, 30 + i as u64)),
            b,
        );
    }
    // lamp arm and shade
    let arm = rect(x, y, 0.2, 0.2, 0.225, 0.65);
    base = mix(base, [0.05, 0.05, 0.05], arm);
    let shade = rect(x, y, 0.18, 0.15, 0.42, 0.24);
    base = mix(base, [0.2, 0.18, 0.15], shade);

    let ambient = 0.02;
    let cone = if y > 0.24 {
        let spread = (x - 0.45).abs() - (y - 0.24) * 0.6;
        let inside = (-spread / 0.04).clamp(0.0, 1.0);
        inside * 4.0 / (1.0 + 6.0 * (y - 0.24))
    } else {
        0.0
    };
    let lit = mul(base, ambient + cone + 1.5 * glow(x, y, 0.36, 0.26, 0.05));
    let bulb = disc(x, y, 0.36, 0.245, 0.02) * 3000.0;
    add(lit, [bulb, bulb * 0.9, bulb * 0.7])
}

fn desk_window(x: f64, y: f64) -> Rgb {
    let wall = plaster(x, y, 3, [0.7, 0.72, 0.75]);
    let mut c = mul(wall, 0.06 + 0.05 * glow(x, y, 0.5, 0.3, 0.35));
    // window with sky and a tree line
    let w = rect(x, y, 0.25, 0.08, 0.75, 0.5);
    if w > 0.0 {
        let sky = mix([25.0, 32.0, 45.0], [60.0, 65.0, 70.0], (y - 0.08) / 0.42);
        let clouds = fbm(x * 6.0, y * 12.0, 4);
        let mut out = mix(
            sky,
            [80.0, 80.0, 80.0],
            ((clouds - 0.55) * 3.0).clamp(0.0, 1.0),
        );
        let tree_top = 0.34 + 0.06 * fbm(x * 10.0, 0.0, 5);
        if y > tree_top {
            out = mul([0.25, 0.45, 0.15], 6.0 * (0.5 + fbm(x * 40.0, y * 40.0, 6)));
        }
        // mullions
        let bar = (x - 0.5).abs() < 0.006 || (y - 0.29).abs() < 0.006;
        if bar {
            out = [0.08, 0.08, 0.08];
        }
        c = mix(c, out, w);
    }
    // desk lit by the window
    if y > 0.6 {
        let light = 0.15 + 1.2 * glow(x, y, 0.5, 0.6, 0.25);
        c = mul(wood(x, y, 7), light);
        let mug = disc(x, y, 0.3, 0.7, 0.05);
        c = mix(
            c,
            mul([0.85, 0.85, 0.9], light * (0.6 + 0.4 * (x - 0.25) / 0.1)),
            mug,
        );
        let laptop = rect(x, y, 0.55, 0.64, 0.85, 0.8);
        c = mix(c, mul([0.3, 0.3, 0.32], light), laptop);
    }
    // shadowed chair in the foreground
    let chair = rect(x, y, 0.05, 0.55, 0.2, 1.0);
    mix(
        c,
        mul([0.2, 0.1, 0.08], 0.02 * (0.5 + fbm(x * 30.0, y * 30.0, 8))),
        chair,
    )
}

fn desk_monitor(x: f64, y: f64) -> Rgb {
    let room = mul(plaster(x, y, 10, [0.5, 0.5, 0.55]), 0.01);
    let mut c = room;
    // monitor glow spill on the wall and desk
    let spill = 0.4 * glow(x, y, 0.5, 0.35, 0.3);
    c = add(c, mul(plaster(x, y, 11, [0.6, 0.65, 0.8]), spill));
    if y > 0.6 {
        c = mul(wood(x, y, 12), 0.01 + 0.6 * glow(x, y, 0.5, 0.55, 0.2));
        // keyboard keys
        let kb = rect(x, y, 0.3, 0.7, 0.7, 0.8);
        let key =
            (((x - 0.3) * 60.0).fract() < 0.8 && ((y - 0.7) * 50.0).fract() < 0.75) as u8 as f64;
        c = mix(c, mul([0.1, 0.1, 0.1], 0.2 + 0.8 * key), kb);
        // desk lamp hotspot
        c = add(c, mul(wood(x, y, 13), 8.0 * glow(x, y, 0.88, 0.75, 0.05)));
    }
    // screen content: bright window, text, dark terminal
    let screen = rect(x, y, 0.3, 0.18, 0.7, 0.5);
    if screen > 0.0 {
        let mut s = [3.0, 3.1, 3.3];
        if rect(x, y, 0.32, 0.2, 0.5, 0.48) > 0.0 {
            s = mul(
                [0.1, 0.12, 0.1],
                1.0 + 20.0 * (1.0 - printed_text(x * 1.3, y * 1.1)),
            );
        } else {
            s = mul(s, printed_text(x, y));
        }
        c = mix(c, s, screen);
    }
    let bezel = rect(x, y, 0.29, 0.17, 0.71, 0.51) * (1.0 - screen);
    c = mix(c, [0.005, 0.005, 0.005], bezel);
    let lamp_bulb = disc(x, y, 0.88, 0.62, 0.015) * 1500.0;
    add(c, [lamp_bulb, lamp_bulb * 0.85, lamp_bulb * 0.6])
}

fn outdoor_sun(x: f64, y: f64) -> Rgb {
    let horizon = 0.55 + 0.05 * fbm(x * 4.0, 0.0, 20);
    if y < horizon {
        let sky = mix([8.0, 14.0, 30.0], [25.0, 28.0, 32.0], y / horizon);
        let clouds = fbm(x * 5.0 + 3.0, y * 9.0, 21);
        let mut c = mix(
            sky,
            [40.0, 40.0, 42.0],
            ((clouds - 0.5) * 2.5).clamp(0.0, 1.0),
        );
        c = add(c, mul([300.0, 280.0, 200.0], glow(x, y, 0.75, 0.2, 0.04)));
        let sun = disc(x, y, 0.75, 0.2, 0.02) * 40000.0;
        return add(c, [sun, sun * 0.97, sun * 0.9]);
    }
    let grass = mul([0.2, 0.35, 0.1], 0.5 + fbm(x * 60.0, y * 120.0, 22));
    // tree trunk and its shadow
    let shadow = if (x - 0.3 - (y - horizon) * 0.8).abs() < 0.03 + 0.2 * (y - horizon) {
        0.12
    } else {
        1.0
    };
    let mut c = mul(grass, 12.0 * shadow);
    let path = ((x - 0.55) - (y - 1.0) * 0.4).abs() < 0.1 * (y - horizon + 0.05);
    if path {
        c = mul(
            [0.6, 0.55, 0.45],
            12.0 * shadow * (0.7 + 0.5 * fbm(x * 80.0, y * 80.0, 23)),
        );
    }
    let trunk = rect(x, y, 0.27, 0.25, 0.31, horizon + 0.02);
    c = mix(
        c,
        mul(
            [0.25, 0.15, 0.08],
            0.8 * (0.5 + fbm(x * 20.0, y * 80.0, 24)),
        ),
        trunk,
    );
    c
}

fn corridor(x: f64, y: f64) -> Rgb {
    let (dx, dy) = (x - 0.5, y - 0.5);
    let depth = 0.08 / dx.abs().max(dy.abs()).max(0.02);
    let u = if dx.abs() > dy.abs() {
        dy / dx.abs()
    } else {
        dx / dy.abs()
    };
    let tex = fbm(u * 4.0, depth * 6.0, 30);
    let (base, lights) = if dy < -dx.abs() {
        // ceiling with periodic fixtures
        let fixture = ((depth * 3.0).fract() < 0.15 && u.abs() < 0.25) as u8 as f64;
        ([0.7, 0.7, 0.7], fixture * 400.0)
    } else if dy > dx.abs() {
        // floor tiles
        let tile = (((u * 4.0).floor() + (depth * 4.0).floor()) as i64).rem_euclid(2) as f64;
        (mul([0.5, 0.45, 0.4], 0.6 + 0.4 * tile), 0.0)
    } else {
        let door = ((depth * 2.0).fract() < 0.2 && u > -0.2 && u < 0.8) as u8 as f64;
        (mix([0.6, 0.6, 0.55], [0.35, 0.2, 0.1], door), 0.0)
    };
    let falloff = 1.5 / (1.0 + 0.2 * depth * depth);
    let end = rect(x, y, 0.47, 0.47, 0.53, 0.53) * 80.0;
    let c = mul(base, falloff * (0.7 + 0.6 * tex));
    add(add(c, [lights; 3]), [end * 0.9, end, end * 1.1])
}

fn lit_balls(x: f64, y: f64) -> Rgb {
    let table = mul([0.15, 0.35, 0.2], 0.4 + 0.3 * fbm(x * 40.0, y * 40.0, 40));
    let back = mul([0.3, 0.3, 0.3], 0.01 + 0.02 * fbm(x * 10.0, y * 10.0, 41));
    let mut c = if y > 0.45 {
        mul(table, 0.2 + 2.0 * glow(x, y, 0.5, 0.5, 0.3))
    } else {
        back
    };
    let light = [-0.5, -0.7, 0.5];
    let norm: f64 = light[0] * light[0] + light[1] * light[1] + light[2] * light[2];
    let light = light.map(|v: f64| v / norm.sqrt());
    let balls = [
        (0.25, 0.6, 0.12, [0.8, 0.1, 0.1]),
        (0.55, 0.55, 0.1, [0.9, 0.8, 0.1]),
        (0.78, 0.65, 0.13, [0.1, 0.2, 0.8]),
        (0.45, 0.8, 0.09, [0.95, 0.95, 0.95]),
    ];
    for (cx, cy, r, albedo) in balls {
        let (px, py) = ((x - cx) / r, (y - cy) / r);
        let d2 = px * px + py * py;
        if d2 < 1.0 {
            let pz = (1.0 - d2).sqrt();
            let n = [px, py, pz];
            let ndotl: f64 = (n[0] * light[0] + n[1] * light[1] + n[2] * light[2]).max(0.0);
            let refl_z = 2.0 * ndotl * n[2] - light[2];
            let highlight = refl_z.max(0.0).powf(80.0) * 500.0;
            c = add(mul(albedo, 0.02 + 3.0 * ndotl), [highlight; 3]);
        } else {
            // contact shadow
            let sd = ((x - cx - 0.3 * r).powi(2) / 1.6 + (y - cy - 0.9 * r).powi(2) * 4.0).sqrt();
            if y > 0.45 && sd < r {
                c = mul(c, 0.15 + 0.85 * sd / r);
            }
        }
    }
    c
}

fn render(scene: Scene) -> RadianceMap {
    let pixels = (0..SIZE * SIZE)
        .map(|i| {
            let (px, py) = (i % SIZE, i / SIZE);
            let (x, y) = (
                (px as f64 + 0.5) / SIZE as f64,
                (py as f64 + 0.5) / SIZE as f64,
            );
            scene(x, y).map(|v| v.max(0.0))
        })
        .collect();
    RadianceMap::new(SIZE, SIZE, pixels).expect("scene radiance is finite")
}

fn main() -> mefuse::Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata/hdr"));
    std::fs::create_dir_all(&out)?;
    let scenes: [(&str, Scene); 6] = [
        ("desk_lamp", desk_lamp),
        ("desk_window", desk_window),
        ("desk_monitor", desk_monitor),
        ("outdoor_sun", outdoor_sun),
        ("corridor", corridor),
        ("lit_balls", lit_balls),
    ];
    for (name, scene) in scenes {
        let path = out.join(format!("{name}.hdr"));
        save_rgbe(&path, &render(scene))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
