//! Small Spider-layout corpora used by the test suites, the acceptance
//! harness and the CLI smoke tests.
//!
//! Each fixture database carries its catalog descriptor, DDL and rows so it
//! can be materialised either in memory or as `<dir>/<db_id>/<db_id>.sqlite`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rusqlite::Connection;
use serde_json::{json, Value as JsonValue};

use crate::schema::{Column, ColumnType, DatabaseSchema, Table};

pub struct FixtureDb {
    pub schema: DatabaseSchema,
    pub ddl: Vec<String>,
    pub rows: Vec<String>,
}

struct ColumnDef {
    name: &'static str,
    ty: ColumnType,
    sql_type: &'static str,
}

struct TableDef {
    name: &'static str,
    columns: Vec<ColumnDef>,
}

fn col(name: &'static str, ty: ColumnType, sql_type: &'static str) -> ColumnDef {
    ColumnDef { name, ty, sql_type }
}

fn humanize(ident: &str) -> String {
    ident.replace('_', " ").to_lowercase()
}

type ColumnRef<'a> = (&'a str, &'a str);

/// `pks` and `fks` use `(table, column)` names.
fn build(
    db_id: &str,
    tables: Vec<TableDef>,
    pks: &[(&str, &str)],
    fks: &[(ColumnRef, ColumnRef)],
    rows: &[&str],
) -> FixtureDb {
    let mut schema = DatabaseSchema {
        db_id: db_id.to_string(),
        tables: Vec::new(),
        columns: vec![Column {
            table: None,
            name: "*".into(),
            display: "*".into(),
            ty: ColumnType::Text,
        }],
        primary_keys: Vec::new(),
        foreign_keys: Vec::new(),
    };
    for (ti, t) in tables.iter().enumerate() {
        schema.tables.push(Table {
            name: t.name.to_string(),
            display: humanize(t.name),
        });
        for c in &t.columns {
            schema.columns.push(Column {
                table: Some(ti),
                name: c.name.to_string(),
                display: humanize(c.name),
                ty: c.ty,
            });
        }
    }
    let lookup = |s: &DatabaseSchema, t: &str, c: &str| {
        let ti = s
            .table_index(t)
            .unwrap_or_else(|| panic!("fixture table {t}"));
        s.column_index(ti, c)
            .unwrap_or_else(|| panic!("fixture column {t}.{c}"))
    };
    for &(t, c) in pks {
        let k = lookup(&schema, t, c);
        schema.primary_keys.push(k);
    }
    for &((ft, fc), (tt, tc)) in fks {
        let from = lookup(&schema, ft, fc);
        let to = lookup(&schema, tt, tc);
        schema.foreign_keys.push((from, to));
    }

    let ddl = tables
        .iter()
        .map(|t| {
            let mut parts: Vec<String> = t
                .columns
                .iter()
                .map(|c| format!("\"{}\" {}", c.name, c.sql_type))
                .collect();
            let keys: Vec<_> = pks
                .iter()
                .filter(|(pt, _)| *pt == t.name)
                .map(|(_, c)| format!("\"{c}\""))
                .collect();
            if !keys.is_empty() {
                parts.push(format!("PRIMARY KEY ({})", keys.join(", ")));
            }
            for ((ft, fc), (tt, tc)) in fks.iter().filter(|((ft, _), _)| *ft == t.name) {
                let _ = ft;
                parts.push(format!(
                    "FOREIGN KEY (\"{fc}\") REFERENCES \"{tt}\"(\"{tc}\")"
                ));
            }
            format!("CREATE TABLE \"{}\" ({})", t.name, parts.join(", "))
        })
        .collect();

    FixtureDb {
        schema,
        ddl,
        rows: rows.iter().map(|r| r.to_string()).collect(),
    }
}

use ColumnType::{Number as N, Others as O, Text as T, Time as D};

/// Students, pets and the bridge table between them.
pub fn pets() -> FixtureDb {
    build(
        "pets_1",
        vec![
            TableDef {
                name: "Student",
                columns: vec![
                    col("StuID", N, "INTEGER"),
                    col("Name", T, "VARCHAR(20)"),
                    col("age", N, "INTEGER"),
                    col("home_country", T, "VARCHAR(40)"),
                ],
            },
            TableDef {
                name: "Has_Pet",
                columns: vec![col("StuID", N, "INTEGER"), col("PetID", N, "INTEGER")],
            },
            TableDef {
                name: "Pet",
                columns: vec![
                    col("PetID", N, "INTEGER"),
                    col("PetType", T, "VARCHAR(20)"),
                    col("pet_age", N, "INTEGER"),
                    col("weight", N, "REAL"),
                ],
            },
        ],
        &[("Student", "StuID"), ("Pet", "PetID")],
        &[
            (("Has_Pet", "StuID"), ("Student", "StuID")),
            (("Has_Pet", "PetID"), ("Pet", "PetID")),
        ],
        &[
            "INSERT INTO Student VALUES (1, 'Linda', 18, 'France'), (2, 'Tracy', 19, 'USA'), \
             (3, 'Shiela', 21, 'France'), (4, 'Dinesh', 20, 'India'), (5, 'Paul', 26, 'France'), \
             (6, 'Andy', 22, 'Germany'), (7, 'Lisa', 20, 'France'), (8, 'Eric', 18, 'Germany')",
            "INSERT INTO Pet VALUES (2001, 'cat', 3, 12.0), (2002, 'dog', 2, 13.4), \
             (2003, 'dog', 1, 9.3), (2004, 'cat', 5, 8.0), (2005, 'bird', 1, 0.5)",
            "INSERT INTO Has_Pet VALUES (1, 2001), (3, 2002), (3, 2003), (5, 2004), (6, 2005)",
        ],
    )
}

pub fn concert_singer() -> FixtureDb {
    build(
        "concert_singer",
        vec![
            TableDef {
                name: "stadium",
                columns: vec![
                    col("Stadium_ID", N, "INTEGER"),
                    col("Location", T, "TEXT"),
                    col("Name", T, "TEXT"),
                    col("Capacity", N, "INTEGER"),
                ],
            },
            TableDef {
                name: "singer",
                columns: vec![
                    col("Singer_ID", N, "INTEGER"),
                    col("Name", T, "TEXT"),
                    col("Country", T, "TEXT"),
                    col("Song_Name", T, "TEXT"),
                    col("Song_release_year", T, "TEXT"),
                    col("Age", N, "INTEGER"),
                    col("Is_male", O, "BOOL"),
                ],
            },
            TableDef {
                name: "concert",
                columns: vec![
                    col("concert_ID", N, "INTEGER"),
                    col("concert_Name", T, "TEXT"),
                    col("Theme", T, "TEXT"),
                    col("Stadium_ID", N, "INTEGER"),
                    col("Year", T, "TEXT"),
                ],
            },
            TableDef {
                name: "singer_in_concert",
                columns: vec![col("concert_ID", N, "INTEGER"), col("Singer_ID", N, "INTEGER")],
            },
        ],
        &[("stadium", "Stadium_ID"), ("singer", "Singer_ID"), ("concert", "concert_ID")],
        &[
            (("concert", "Stadium_ID"), ("stadium", "Stadium_ID")),
            (("singer_in_concert", "Singer_ID"), ("singer", "Singer_ID")),
            (("singer_in_concert", "concert_ID"), ("concert", "concert_ID")),
        ],
        &[
            "INSERT INTO stadium VALUES (1, 'Raith Rovers', 'Stark''s Park', 10104), \
             (2, 'Ayr United', 'Somerset Park', 11998), (3, 'East Fife', 'Bayview Stadium', 2000), \
             (4, 'Queen''s Park', 'Hampden Park', 52500), (5, 'Stirling Albion', 'Forthbank Stadium', 3808), \
             (6, 'Arbroath', 'Gayfield Park', 4125), (7, 'Peterhead', 'Balmoor', 6000)",
            "INSERT INTO singer VALUES (1, 'Joe Sharp', 'Netherlands', 'You', '1992', 52, 'F'), \
             (2, 'Timbaland', 'United States', 'Dangerous', '2008', 32, 'T'), \
             (3, 'Justin Brown', 'France', 'Hey Oh', '2013', 29, 'T'), \
             (4, 'Rose White', 'France', 'Sun', '2003', 41, 'F'), \
             (5, 'John Nizinik', 'France', 'Gentleman', '2014', 43, 'T'), \
             (6, 'Tribal King', 'France', 'Love', '2016', 25, 'T')",
            "INSERT INTO concert VALUES (1, 'Auditions', 'Free choice', 1, '2014'), \
             (2, 'Super bootcamp', 'Free choice 2', 2, '2014'), (3, 'Home Visits', 'Bleeding Love', 2, '2015'), \
             (4, 'Week 1', 'Wide Awake', 7, '2014'), (5, 'Week 1', 'Happy Tonight', 2, '2015'), \
             (6, 'Week 2', 'Party All Night', 6, '2015')",
            "INSERT INTO singer_in_concert VALUES (1, 2), (1, 3), (1, 5), (2, 3), (2, 6), \
             (3, 5), (4, 4), (5, 6), (5, 3), (6, 2)",
        ],
    )
}

/// Flights reference airports twice (origin and destination).
pub fn flights() -> FixtureDb {
    build(
        "flight_4",
        vec![
            TableDef {
                name: "flight",
                columns: vec![
                    col("Flight_No", N, "INTEGER"),
                    col("Airline", T, "TEXT"),
                    col("Origin", T, "TEXT"),
                    col("Destination", T, "TEXT"),
                    col("Aircraft", T, "TEXT"),
                    col("Departure_Date", D, "TEXT"),
                    col("Price", N, "REAL"),
                ],
            },
            TableDef {
                name: "airports",
                columns: vec![
                    col("Code", T, "TEXT"),
                    col("Name", T, "TEXT"),
                    col("City", T, "TEXT"),
                    col("Country", T, "TEXT"),
                ],
            },
        ],
        &[("flight", "Flight_No"), ("airports", "Code")],
        &[
            (("flight", "Origin"), ("airports", "Code")),
            (("flight", "Destination"), ("airports", "Code")),
        ],
        &[
            "INSERT INTO airports VALUES ('JFK', 'John F Kennedy International', 'New York', 'United States'), \
             ('LAX', 'Los Angeles International', 'Los Angeles', 'United States'), \
             ('ORD', 'O''Hare International', 'Chicago', 'United States'), \
             ('LHR', 'Heathrow', 'London', 'United Kingdom'), \
             ('CDG', 'Charles de Gaulle', 'Paris', 'France')",
            "INSERT INTO flight VALUES \
             (6, 'United Airlines', 'LAX', 'JFK', 'Airbus A340-300', '8/9/2010', 235.98), \
             (7, 'United Airlines', 'ORD', 'LHR', 'Boeing 747-400', '8/11/2010', 621.5), \
             (13, 'JetBlue Airways', 'LAX', 'JFK', 'Airbus A320', '4/3/2010', 189.0), \
             (33, 'Air France', 'CDG', 'LAX', 'Airbus A340-300', '12/24/2010', 802.1), \
             (34, 'British Airways', 'LHR', 'ORD', 'Boeing 777-200', '8/30/2010', 655.0), \
             (68, 'JetBlue Airways', 'ORD', 'JFK', 'Airbus A320', '3/15/2010', 120.25)",
        ],
    )
}

pub fn school() -> FixtureDb {
    build(
        "school_register",
        vec![
            TableDef {
                name: "classroom",
                columns: vec![
                    col("Class_ID", N, "INTEGER"),
                    col("Grade", N, "INTEGER"),
                    col("Teacher", T, "TEXT"),
                ],
            },
            TableDef {
                name: "pupil",
                columns: vec![
                    col("Pupil_ID", N, "INTEGER"),
                    col("First_Name", T, "TEXT"),
                    col("Last_Name", T, "TEXT"),
                    col("Gender", T, "VARCHAR(1)"),
                    col("Class_ID", N, "INTEGER"),
                    col("Is_Active", N, "INTEGER"),
                    col("Birth_Date", D, "DATE"),
                ],
            },
        ],
        &[("classroom", "Class_ID"), ("pupil", "Pupil_ID")],
        &[(("pupil", "Class_ID"), ("classroom", "Class_ID"))],
        &[
            "INSERT INTO classroom VALUES (101, 3, 'Ms Walker'), (102, 4, 'Mr Hansen'), \
             (103, 4, 'Ms Okafor'), (104, 5, 'Mr Lee')",
            "INSERT INTO pupil VALUES \
             (1, 'Maria', 'Hansen', 'F', 102, 1, '2012-08-14'), \
             (2, 'Tom', 'Harris', 'M', 102, 1, '2012-03-02'), \
             (3, 'Ada', 'Lovelace', 'F', 103, 0, '2012-08-30'), \
             (4, 'Liam', 'Smith', 'M', 101, 1, '2013-01-19'), \
             (5, 'Emma', 'Hall', 'F', 104, 1, '2011-11-05'), \
             (6, 'Noah', 'Brown', 'M', 103, 0, '2012-06-21'), \
             (7, 'Zoe', 'Chen', 'F', 101, 1, '2013-08-08')",
        ],
    )
}

/// Includes a self-referencing foreign key (`Manager_ID -> Employee_ID`).
pub fn employees() -> FixtureDb {
    build(
        "employee_hire",
        vec![
            TableDef {
                name: "department",
                columns: vec![
                    col("Department_ID", N, "INTEGER"),
                    col("Name", T, "TEXT"),
                    col("Budget", N, "REAL"),
                ],
            },
            TableDef {
                name: "employee",
                columns: vec![
                    col("Employee_ID", N, "INTEGER"),
                    col("Name", T, "TEXT"),
                    col("Age", N, "INTEGER"),
                    col("City", T, "TEXT"),
                    col("Manager_ID", N, "INTEGER"),
                    col("Salary", N, "INTEGER"),
                    col("Department_ID", N, "INTEGER"),
                ],
            },
        ],
        &[("department", "Department_ID"), ("employee", "Employee_ID")],
        &[
            (("employee", "Manager_ID"), ("employee", "Employee_ID")),
            (("employee", "Department_ID"), ("department", "Department_ID")),
        ],
        &[
            "INSERT INTO department VALUES (1, 'Sales', 120000.0), (2, 'Engineering', 450000.0), \
             (3, 'Marketing', 90000.5)",
            "INSERT INTO employee VALUES (1, 'George Chuter', 23, 'Bristol', NULL, 83000, 2), \
             (2, 'Lee Mears', 29, 'Bath', 1, 51000, 2), (3, 'Mark Regan', 43, 'Bristol', 1, 47000, 1), \
             (4, 'Jason Hobson', 30, 'Bristol', 3, 62000, 1), (5, 'Tim Payne', 29, 'Wasps', 3, 39000, 3), \
             (6, 'Andrew Sheridan', 28, 'Bath', 1, 55000, 2)",
        ],
    )
}

/// A single table, no foreign keys.
pub fn airport_directory() -> FixtureDb {
    build(
        "airport_directory",
        vec![TableDef {
            name: "airports",
            columns: vec![
                col("Code", T, "TEXT"),
                col("Name", T, "TEXT"),
                col("City", T, "TEXT"),
                col("Country", T, "TEXT"),
            ],
        }],
        &[("airports", "Code")],
        &[],
        &[
            "INSERT INTO airports VALUES ('JFK', 'John F Kennedy International', 'New York', 'United States'), \
             ('LAX', 'Los Angeles International', 'Los Angeles', 'United States'), \
             ('ZRH', 'Zurich Airport', 'Zurich', 'Switzerland'), ('GVA', 'Geneva Airport', 'Geneva', 'Switzerland')",
        ],
    )
}

/// Five tables joined in a line: A - B - C - D - E.
pub fn path_graph() -> FixtureDb {
    let names = ["A", "B", "C", "D", "E"];
    let tables = names
        .iter()
        .map(|&n| TableDef {
            name: n,
            columns: vec![col("id", N, "INTEGER"), col("prev_id", N, "INTEGER")],
        })
        .collect();
    build(
        "path_graph",
        tables,
        &[
            ("A", "id"),
            ("B", "id"),
            ("C", "id"),
            ("D", "id"),
            ("E", "id"),
        ],
        &[
            (("B", "prev_id"), ("A", "id")),
            (("C", "prev_id"), ("B", "id")),
            (("D", "prev_id"), ("C", "id")),
            (("E", "prev_id"), ("D", "id")),
        ],
        &[],
    )
}

pub fn pets_schema() -> DatabaseSchema {
    pets().schema
}

pub fn airports_schema() -> DatabaseSchema {
    airport_directory().schema
}

pub fn employee_schema() -> DatabaseSchema {
    employees().schema
}

pub fn all_databases() -> Vec<FixtureDb> {
    vec![
        pets(),
        concert_singer(),
        flights(),
        school(),
        employees(),
        airport_directory(),
    ]
}

pub fn all_schemas() -> Vec<DatabaseSchema> {
    let mut out: Vec<_> = all_databases().into_iter().map(|d| d.schema).collect();
    out.push(path_graph().schema);
    out
}

impl FixtureDb {
    pub fn populate(&self, conn: &Connection) -> rusqlite::Result<()> {
        for stmt in self.ddl.iter().chain(&self.rows) {
            conn.execute_batch(stmt)?;
        }
        Ok(())
    }

    pub fn open_in_memory(&self) -> Connection {
        let conn = Connection::open_in_memory().expect("in-memory sqlite");
        self.populate(&conn).expect("fixture rows load");
        conn
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        if path.exists() {
            fs::remove_file(path)?;
        }
        let conn = Connection::open(path).map_err(io::Error::other)?;
        self.populate(&conn).map_err(io::Error::other)
    }
}

/// `(db_id, question, gold SQL)` triples covering every difficulty bucket.
/// Some entries are deliberately outside what the SemQL converter accepts
/// (DISTINCT, self-joins, GROUP BY on a non-projected key).
pub fn corpus_samples() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("pets_1", "How many pets are owned by French students that are older than 20?",
         "SELECT count(*) FROM Student AS T1 JOIN Has_Pet AS T2 ON T1.StuID = T2.StuID JOIN Pet AS T3 ON T2.PetID = T3.PetID WHERE T1.home_country = 'France' AND T1.age > 20"),
        ("pets_1", "What are the names of students who have a dog?",
         "SELECT T1.Name FROM Student AS T1 JOIN Has_Pet AS T2 ON T1.StuID = T2.StuID JOIN Pet AS T3 ON T3.PetID = T2.PetID WHERE T3.PetType = 'dog'"),
        ("pets_1", "Find the average age of students from France.",
         "SELECT avg(age) FROM Student WHERE home_country = 'France'"),
        ("pets_1", "List the pet types and their weights ordered by weight descending.",
         "SELECT PetType, weight FROM Pet ORDER BY weight DESC"),
        ("pets_1", "Which home country has the most students?",
         "SELECT home_country FROM Student GROUP BY home_country ORDER BY count(*) DESC LIMIT 1"),
        ("pets_1", "Find the number of pets for each student who has any pet and student id.",
         "SELECT count(*), T1.StuID FROM Student AS T1 JOIN Has_Pet AS T2 ON T1.StuID = T2.StuID GROUP BY T1.StuID"),
        ("pets_1", "Find the names of students who do not own any pet.",
         "SELECT Name FROM Student WHERE StuID NOT IN (SELECT StuID FROM Has_Pet)"),
        ("pets_1", "Show the names of students older than the average age.",
         "SELECT Name FROM Student WHERE age > (SELECT avg(age) FROM Student)"),
        ("pets_1", "What is the type of the heaviest pet?",
         "SELECT PetType FROM Pet ORDER BY weight DESC LIMIT 1"),
        ("pets_1", "Which students are from France or Germany?",
         "SELECT Name FROM Student WHERE home_country = \"France\" OR home_country = \"Germany\""),
        ("pets_1", "Find the names of students whose age is between 20 and 22.",
         "SELECT Name FROM Student WHERE age BETWEEN 20 AND 22"),
        ("pets_1", "List the distinct home countries of students.",
         "SELECT DISTINCT home_country FROM Student"),
        ("pets_1", "Find the home countries that have both students older than 21 and students younger than 19.",
         "SELECT home_country FROM Student WHERE age > 21 INTERSECT SELECT home_country FROM Student WHERE age < 19"),
        ("concert_singer", "How many singers do we have?",
         "SELECT count(*) FROM singer"),
        ("concert_singer", "Show name, country, age for all singers ordered by age from the oldest to the youngest.",
         "SELECT name, country, age FROM singer ORDER BY age DESC"),
        ("concert_singer", "What is the average, minimum, and maximum age of all singers from France?",
         "SELECT avg(age), min(age), max(age) FROM singer WHERE country = 'France'"),
        ("concert_singer", "Show the song name and the song release year of the youngest singer.",
         "SELECT song_name, song_release_year FROM singer ORDER BY age LIMIT 1"),
        ("concert_singer", "What are the names of the top 3 oldest singers?",
         "SELECT name FROM singer ORDER BY age DESC LIMIT 3"),
        ("concert_singer", "Show all countries and the number of singers in each country.",
         "SELECT country, count(*) FROM singer GROUP BY country"),
        ("concert_singer", "List all song names by singers above the average age.",
         "SELECT song_name FROM singer WHERE age > (SELECT avg(age) FROM singer)"),
        ("concert_singer", "Show location and name for all stadiums with a capacity between 5000 and 10000.",
         "SELECT location, name FROM stadium WHERE capacity BETWEEN 5000 AND 10000"),
        ("concert_singer", "What is the maximum capacity and the average capacity of all stadiums?",
         "SELECT max(capacity), avg(capacity) FROM stadium"),
        ("concert_singer", "Show the stadium name and the number of concerts in each stadium.",
         "SELECT T2.name, count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id GROUP BY T1.stadium_id"),
        ("concert_singer", "Show names for all stadiums except for stadiums having a concert in year 2014.",
         "SELECT name FROM stadium EXCEPT SELECT T2.name FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id WHERE T1.year = 2014"),
        ("concert_singer", "Find the names of singers who performed in a concert in 2014.",
         "SELECT T2.name FROM singer_in_concert AS T1 JOIN singer AS T2 ON T1.singer_id = T2.singer_id JOIN concert AS T3 ON T1.concert_id = T3.concert_id WHERE T3.year = 2014"),
        ("concert_singer", "What are the names and countries of singers whose song names contain the word 'Hey'?",
         "SELECT name, country FROM singer WHERE song_name LIKE '%Hey%'"),
        ("concert_singer", "Which year has the most concerts?",
         "SELECT year FROM concert GROUP BY year ORDER BY count(*) DESC LIMIT 1"),
        ("concert_singer", "Show countries where a singer above age 40 and a singer below 30 are from.",
         "SELECT country FROM singer WHERE age > 40 INTERSECT SELECT country FROM singer WHERE age < 30"),
        ("concert_singer", "How many concerts are there in year 2014 or 2015?",
         "SELECT count(*) FROM concert WHERE year = 2014 OR year = 2015"),
        ("concert_singer", "Which countries have more than 2 singers?",
         "SELECT country FROM singer GROUP BY country HAVING count(*) > 2"),
        ("concert_singer", "Show the stadium name and capacity with the most concerts in year 2014 or after.",
         "SELECT T2.name, T2.capacity FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id WHERE T1.year >= 2014 GROUP BY T2.stadium_id ORDER BY count(*) DESC LIMIT 1"),
        ("flight_4", "Show all flight numbers with aircraft Airbus A340-300.",
         "SELECT Flight_No FROM flight WHERE Aircraft = \"Airbus A340-300\""),
        ("flight_4", "Which flights go to John F Kennedy International Airport?",
         "SELECT Flight_No FROM flight WHERE Destination = 'JFK'"),
        ("flight_4", "How many flights departed in August?",
         "SELECT count(*) FROM flight WHERE Departure_Date LIKE '8/%'"),
        ("flight_4", "What is the number of the cheapest flight?",
         "SELECT Flight_No FROM flight ORDER BY Price ASC LIMIT 1"),
        ("flight_4", "Show the names of airports where flights by United Airlines depart.",
         "SELECT T2.Name FROM flight AS T1 JOIN airports AS T2 ON T1.Origin = T2.Code WHERE T1.Airline = 'United Airlines'"),
        ("flight_4", "Which airlines have flights with a price above 600 or below 150?",
         "SELECT Airline FROM flight WHERE Price > 600 OR Price < 150"),
        ("school_register", "How many female pupils are in the fourth-grade classes?",
         "SELECT count(*) FROM pupil AS T1 JOIN classroom AS T2 ON T1.Class_ID = T2.Class_ID WHERE T1.Gender = 'F' AND T2.Grade = 4"),
        ("school_register", "List the first names of active pupils.",
         "SELECT First_Name FROM pupil WHERE Is_Active = 1"),
        ("school_register", "Which pupils were born in August?",
         "SELECT First_Name FROM pupil WHERE Birth_Date LIKE '%-08-%'"),
        ("school_register", "Whose last name has the substring 'Ha'?",
         "SELECT First_Name, Last_Name FROM pupil WHERE Last_Name LIKE '%Ha%'"),
        ("school_register", "Which teachers have pupils whose first name does not contain the letter M?",
         "SELECT T2.Teacher FROM pupil AS T1 JOIN classroom AS T2 ON T1.Class_ID = T2.Class_ID WHERE T1.First_Name NOT LIKE '%M%'"),
        ("employee_hire", "Show the names of employees whose salary is greater than 50000.",
         "SELECT Name FROM employee WHERE Salary > 50000"),
        ("employee_hire", "What is the name of the department with the largest budget?",
         "SELECT Name FROM department ORDER BY Budget DESC LIMIT 1"),
        ("employee_hire", "Find the names of employees working in the Sales department.",
         "SELECT T1.Name FROM employee AS T1 JOIN department AS T2 ON T1.Department_ID = T2.Department_ID WHERE T2.Name = 'Sales'"),
        ("employee_hire", "Show the names of employees and the names of their managers.",
         "SELECT T1.Name, T2.Name FROM employee AS T1 JOIN employee AS T2 ON T1.Manager_ID = T2.Employee_ID"),
        ("employee_hire", "Which cities have employees older than 28 and younger than 40?",
         "SELECT City FROM employee WHERE Age > 28 AND Age < 40"),
        ("airport_directory", "Show all airports.",
         "SELECT * FROM airports"),
        ("airport_directory", "How many airports are in the United States?",
         "SELECT count(*) FROM airports WHERE Country = 'United States'"),
    ]
}

/// Paths of a corpus written by [`write_corpus`].
#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub root: PathBuf,
    pub catalog: PathBuf,
    pub samples: PathBuf,
    pub db_dir: PathBuf,
}

/// Writes `tables.json`, `dev.json` and `database/<db_id>/<db_id>.sqlite`
/// under `root`.
pub fn write_corpus(root: &Path) -> io::Result<FixtureCorpus> {
    let dbs = all_databases();
    let db_dir = root.join("database");
    for db in &dbs {
        db.write_to(&crate::schema::database_path(&db_dir, &db.schema.db_id))?;
    }
    let catalog: Vec<JsonValue> = dbs.iter().map(|d| d.schema.to_catalog_value()).collect();
    let samples: Vec<JsonValue> = corpus_samples()
        .into_iter()
        .map(|(db, q, sql)| json!({"db_id": db, "question": q, "query": sql}))
        .collect();
    let catalog_path = root.join("tables.json");
    let samples_path = root.join("dev.json");
    fs::write(&catalog_path, serde_json::to_string_pretty(&catalog)?)?;
    fs::write(&samples_path, serde_json::to_string_pretty(&samples)?)?;
    Ok(FixtureCorpus {
        root: root.to_path_buf(),
        catalog: catalog_path,
        samples: samples_path,
        db_dir,
    })
}
