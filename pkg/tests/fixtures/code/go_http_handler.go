package main

import (
	"encoding/json"
	"log"
	"net/http"
)

type status struct {
	OK      bool   `json:"ok"`
	Version string `json:"version"`
}

func health(w http.ResponseWriter, r *http.Request) {
	w.Header().Set("Content-Type", "application/json")
	if err := json.NewEncoder(w).Encode(status{OK: true, Version: "1.2.0"}); err != nil {
		http.Error(w, err.Error(), http.StatusInternalServerError)
	}
}

func main() {
	http.HandleFunc("/health", health)
	log.Fatal(http.ListenAndServe(":8080", nil))
}
