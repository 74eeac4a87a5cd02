//! Reproduces the connection-type table: which members of the family are
//! natural, canonical, have 3-form torsion or are symmetric in each class.

use norden::connections::table1_matrix;

fn main() -> norden::Result<()> {
    let table = table1_matrix(42, 4)?;
    println!("{}", table.to_text());
    for cell in table.cells.iter().filter(|c| c.note.is_some()) {
        println!(
            "{} / {}: {}",
            cell.row.name(),
            cell.column.name(),
            cell.note.as_deref().unwrap_or("")
        );
    }
    println!("all cells reproduce: {}", table.all_pass());
    Ok(())
}
