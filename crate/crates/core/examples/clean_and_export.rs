//! Raw MOT file -> clean center/offset file -> YOLO labels.

use stereo_mot::mot_io::{clean_tracks, export_yolo_labels, parse_mot, serialize_clean};

const RAW: &str = "\
1,1,100,200,40,20,1,1
1,2,300,220,36,18,1,1
2,1,104,201,40,20,1,1
2,2,298,224,36,18,1,1
";

fn main() -> stereo_mot::Result<()> {
    let raw = parse_mot(RAW)?;
    let (clean, text) = clean_tracks(&raw);
    print!("{text}");
    assert_eq!(text, serialize_clean(&clean));
    let dir = std::env::temp_dir().join("clean_and_export");
    let export = export_yolo_labels(&clean, &dir, false)?;
    println!("{export:?}");
    Ok(())
}
