package main

import (
	"fmt"
	"math"
)

type Vec struct{ X, Y float64 }

func (v Vec) Len() float64      { return math.Hypot(v.X, v.Y) }
func (v Vec) Add(o Vec) Vec     { return Vec{v.X + o.X, v.Y + o.Y} }
func (v Vec) Scale(k float64) Vec { return Vec{v.X * k, v.Y * k} }

func main() {
	v := Vec{3, 4}
	fmt.Println(v.Len(), v.Add(Vec{1, 1}), v.Scale(0.5))
}
