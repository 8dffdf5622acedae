//! Dense flow between two frames, saved as .flo.
//!
//! cargo run --release --example optical_flow [-- <prev.png> <next.png> <out.flo>]

use lmpkit::flow::{compute_flow, FlowField, FlowParams, Frame};
use lmpkit::synth::make_frame_pair;

fn main() -> lmpkit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (prev, next, truth) = if args.len() >= 2 {
        (Frame::load(&args[0])?, Frame::load(&args[1])?, None)
    } else {
        let pair = make_frame_pair((2.0, -1.0), 128, 128, 11)?;
        (pair.prev, pair.next, Some((2.0f32, -1.0f32)))
    };
    let flow = compute_flow(&prev, &next, &FlowParams::default())?;
    let (w, h) = (flow.width(), flow.height());
    let [u, v] = flow.get(w / 2, h / 2);
    println!(
        "{w}x{h} field, centre vector ({u:.3}, {v:.3}), max magnitude {:.3}",
        flow.max_magnitude()
    );

    if let Some((dx, dy)) = truth {
        let m = 16;
        let mut sum = 0.0f32;
        for y in m..h - m {
            for x in m..w - m {
                let [u, v] = flow.get(x, y);
                sum += ((u - dx).powi(2) + (v - dy).powi(2)).sqrt();
            }
        }
        println!(
            "mean endpoint error {:.4} px",
            sum / ((w - 2 * m) * (h - 2 * m)) as f32
        );
    }

    let out = args.get(2).cloned().unwrap_or_else(|| {
        std::env::temp_dir()
            .join("lmpkit_example.flo")
            .to_string_lossy()
            .into_owned()
    });
    flow.save_flo(&out)?;
    let back = FlowField::load_flo(&out)?;
    assert_eq!(back, flow);
    println!("wrote {out}");
    Ok(())
}
