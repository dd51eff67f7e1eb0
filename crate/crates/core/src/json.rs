//! Serde glue for scalars: exact values are written as strings (`"3/8"`),
//! floats as JSON numbers. Both forms are accepted on input.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Num<T>(pub T);

impl<T: Scalar> Serialize for Num<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if T::EXACT {
            let text = self.0.render();
            match text.parse::<i64>() {
                Ok(i) => serializer.serialize_i64(i),
                Err(_) => serializer.serialize_str(&text),
            }
        } else {
            serializer.serialize_f64(self.0.to_f64())
        }
    }
}

struct NumVisitor<T>(PhantomData<T>);

impl<T: Scalar> NumVisitor<T> {
    fn parse<E: de::Error>(text: &str) -> Result<Num<T>, E> {
        T::parse(text)
            .map(Num)
            .ok_or_else(|| E::custom(format!("not a number: {text:?}")))
    }
}

impl<'de, T: Scalar> Visitor<'de> for NumVisitor<T> {
    type Value = Num<T>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a string such as \"3/4\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        Ok(Num(T::from_i64(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        Self::parse(&v.to_string())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        Ok(Num(T::from_f64(v)))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        Self::parse(v)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Num<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(NumVisitor(PhantomData))
    }
}

pub fn wrap<T: Scalar>(values: &[T]) -> Vec<Num<T>> {
    values.iter().cloned().map(Num).collect()
}

pub fn unwrap<T: Scalar>(values: Vec<Num<T>>) -> Vec<T> {
    values.into_iter().map(|n| n.0).collect()
}
