package main

import "fmt"
import xlog "log"

import (
	"net/http"
	"os"
	_ "embed"
	str "strings"
)

func main() { fmt.Println(xlog.Flags(), os.Args, str.Title("x")) }
