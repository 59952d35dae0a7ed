//! Compound scores frozen from the reference VADER implementation (3.3.2),
//! computed at full precision.

pub const ORACLE: &[(&str, f64)] = &[
    ("VADER is smart, handsome, and funny.", 0.8316320352807864),
    ("VADER is smart, handsome, and funny!", 0.8438963152489635),
    ("VADER is very smart, handsome, and funny.", 0.8545099180905618),
    ("VADER is VERY SMART, handsome, and FUNNY.", 0.9226571915792521),
    ("VADER is VERY SMART, handsome, and FUNNY!!!", 0.9342086844920943),
    ("VADER is VERY SMART, uber handsome, and FRIGGIN FUNNY!!!", 0.946938352138548),
    ("VADER is not smart, handsome, nor funny.", -0.7424176323732686),
    ("The book was good.", 0.44043357076016854),
    ("At least it isn't a horrible book.", 0.43102002306105164),
    ("The book was only kind of good.", 0.38324473176419577),
    ("The plot was good, but the characters are uncompelling and the dialog is not great.", -0.7041689565994302),
    ("Today SUX!", -0.5461374667327111),
    ("Today only kinda sux! But I'll get by, lol", 0.5249142208642265),
    ("Make sure you :) or :D today!", 0.8633021070236708),
    ("Not bad at all", 0.43102002306105164),
    ("Sentiment analysis has never been this good!", 0.5671530510378399),
    ("Without a doubt, excellent idea.", 0.7012865169261457),
    ("Roger Dodger is one of the least compelling variations on this theme.", -0.16947302270321746),
    ("The product is not good.", -0.3412376512543242),
    ("The product is good.", 0.44043357076016854),
    ("The mouse is defective and the scroll wheel broke after two days.", -0.6907747429922022),
    ("I am extremely disappointed, the headphones stopped working and no refund was given!!", -0.7950697518959399),
    ("Worst purchase ever?? The bag tore on the first day.", -0.6662277891193921),
    ("The keyboard is okay but the keys are really sticky and annoying.", -0.5416441924349266),
    ("The user wants to convey about the complaint of mouse.", -0.295958174200194),
    ("Catch utf-8 emoji such as 💘 and 💋 and 😁", 0.875),
    ("", 0.0),
];
