//! Matches predicted boxes to ground truth and scores their text.

use vtext::evalkit::{evaluate, AnnotatedBox, FrameAnnotation};
use vtext::pixelcore::Rect;

fn main() {
    let truth = vec![
        FrameAnnotation { frame: "a.png".into(), boxes: vec![AnnotatedBox::new(Rect::new(10, 10, 100, 20), "سلام العالم")] },
        FrameAnnotation { frame: "b.png".into(), boxes: vec![AnnotatedBox::new(Rect::new(40, 80, 60, 18), "قمر")] },
    ];
    let pred = vec![
        FrameAnnotation {
            frame: "a.png".into(),
            boxes: vec![
                AnnotatedBox::new(Rect::new(12, 11, 98, 19), "سلام العالم"),
                AnnotatedBox::new(Rect::new(200, 5, 30, 10), "نور"),
            ],
        },
        FrameAnnotation { frame: "b.png".into(), boxes: vec![AnnotatedBox::new(Rect::new(42, 80, 60, 18), "قلم")] },
    ];
    let report = evaluate(&pred, &truth, 0.5);
    print!("{}", report.table());
}
