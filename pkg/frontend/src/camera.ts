/**
 * Pan/zoom camera between world and screen coordinates.
 *
 * World axes have +y up; screen axes are canvas pixels with +y down. The
 * world point (centerX, centerY) always maps to the viewport midpoint and
 * zoom is measured in pixels per world unit. screenToWorld inverts
 * worldToScreen exactly up to floating-point rounding.
 */

export interface ScreenPoint {
  x: number;
  y: number;
}

export interface WorldPoint {
  x: number;
  y: number;
}

export const MIN_ZOOM = 1e-6;
export const MAX_ZOOM = 1e6;

export class Camera {
  centerX = 0;
  centerY = 0;
  zoom = 1;
  viewportWidth: number;
  viewportHeight: number;

  constructor(viewportWidth: number, viewportHeight: number) {
    this.viewportWidth = viewportWidth;
    this.viewportHeight = viewportHeight;
  }

  setViewport(width: number, height: number): void {
    this.viewportWidth = width;
    this.viewportHeight = height;
  }

  worldToScreen(wx: number, wy: number): ScreenPoint {
    return {
      x: (wx - this.centerX) * this.zoom + this.viewportWidth / 2,
      y: (this.centerY - wy) * this.zoom + this.viewportHeight / 2,
    };
  }

  screenToWorld(sx: number, sy: number): WorldPoint {
    return {
      x: this.centerX + (sx - this.viewportWidth / 2) / this.zoom,
      y: this.centerY - (sy - this.viewportHeight / 2) / this.zoom,
    };
  }

  /** Shift the view by a screen-space drag delta, in pixels. */
  panByScreen(dx: number, dy: number): void {
    this.centerX -= dx / this.zoom;
    this.centerY += dy / this.zoom;
  }

  /** Scale zoom by factor while the world point under (sx, sy) stays put. */
  zoomAt(sx: number, sy: number, factor: number): void {
    const anchor = this.screenToWorld(sx, sy);
    this.zoom = clampZoom(this.zoom * factor);
    this.centerX = anchor.x - (sx - this.viewportWidth / 2) / this.zoom;
    this.centerY = anchor.y + (sy - this.viewportHeight / 2) / this.zoom;
  }

  /** Center on a world rectangle, zoomed so it fits with a relative margin. */
  fit(minX: number, minY: number, maxX: number, maxY: number, margin = 0.1): void {
    const spanX = Math.max(maxX - minX, 1e-9) * (1 + 2 * margin);
    const spanY = Math.max(maxY - minY, 1e-9) * (1 + 2 * margin);
    this.centerX = (minX + maxX) / 2;
    this.centerY = (minY + maxY) / 2;
    this.zoom = clampZoom(Math.min(this.viewportWidth / spanX, this.viewportHeight / spanY));
  }
}

function clampZoom(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, zoom));
}
