function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function num(x: number): string {
  return Number(x.toFixed(3)).toString();
}

/** Minimal SVG document builder; enough for static figure files. */
export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${num(x)}" y="${num(y)}" width="${num(w)}" ` +
        `height="${num(h)}" fill="${fill}"/>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string): void {
    this.parts.push(
      `<line x1="${num(x1)}" y1="${num(y1)}" x2="${num(x2)}" ` +
        `y2="${num(y2)}" stroke="${stroke}" stroke-width="1"/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string): void {
    const pts = points.map(([x, y]) => `${num(x)},${num(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
        `stroke-width="1.5"/>`
    );
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start"): void {
    this.parts.push(
      `<text x="${num(x)}" y="${num(y)}" font-size="${size}" ` +
        `font-family="sans-serif" text-anchor="${anchor}">${esc(s)}</text>`
    );
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}
