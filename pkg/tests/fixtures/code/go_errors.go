package main

import (
	"errors"
	"fmt"
	"strconv"
)

type ParseError struct {
	Line int
	Err  error
}

func (e *ParseError) Error() string { return fmt.Sprintf("line %d: %v", e.Line, e.Err) }
func (e *ParseError) Unwrap() error { return e.Err }

func parseAll(lines []string) ([]int, error) {
	out := make([]int, 0, len(lines))
	for i, l := range lines {
		n, err := strconv.Atoi(l)
		if err != nil {
			return nil, &ParseError{Line: i + 1, Err: err}
		}
		out = append(out, n)
	}
	return out, nil
}

func main() {
	_, err := parseAll([]string{"1", "2", "x"})
	var pe *ParseError
	if errors.As(err, &pe) {
		fmt.Println("failed at line", pe.Line)
	}
}
